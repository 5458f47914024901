#include "sdfm/sgcv.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sdfm/errors.hpp"
#include "sdfm/io.hpp"
#include "sdfm/svg.hpp"

namespace sdfm {

SgcvMatrix sgcv(const Eigen::MatrixXd& values, int h, int d, int S) {
  const int T = static_cast<int>(values.cols());
  if (h < 0) throw SpecError("lag h must be nonnegative");
  if (h >= T) {
    throw LagTooLarge("lag " + std::to_string(h) +
                      " requires T > h, panel has T=" + std::to_string(T));
  }
  if (d < 1) throw SpecError("differencing exponent d must be >= 1");
  if (S < 2) throw SpecError("season length S must be >= 2");
  if (!values.allFinite()) {
    throw MissingDataError("SGCV input contains non-finite values");
  }
  SgcvMatrix out{h, d, S, {}};
  const double scale =
      std::pow(static_cast<double>(S) / static_cast<double>(T), 2.0 * d);
  out.matrix = scale * values.rightCols(T - h) *
               values.leftCols(T - h).transpose();
  return out;
}

SgcvMatrix sgcv(const Panel& panel, int h, int d, int S) {
  if (panel.any_missing()) {
    throw MissingDataError("SGCV requires a fully observed panel (" +
                           std::to_string(panel.missing_count()) +
                           " cells missing)");
  }
  return sgcv(panel.values, h, d, S);
}

Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols()) {
    throw ShapeError("symmetrize requires a square matrix");
  }
  return 0.5 * (a + a.transpose());
}

SymmetricEigen eigen_symmetric(const Eigen::MatrixXd& matrix,
                               double symmetry_tol) {
  if (matrix.rows() != matrix.cols()) {
    throw ShapeError("eigen_symmetric requires a square matrix");
  }
  const double asym = (matrix - matrix.transpose()).cwiseAbs().maxCoeff();
  if (!(asym <= symmetry_tol)) {
    throw SymmetryError("matrix is not symmetric (max |A - A'| = " +
                        format_double(asym) + ")");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(matrix);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("symmetric eigendecomposition failed to converge");
  }
  const int n = static_cast<int>(matrix.rows());
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  const Eigen::VectorXd& raw = solver.eigenvalues();
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return std::abs(raw(a)) > std::abs(raw(b));
  });
  SymmetricEigen out;
  out.values.resize(n);
  out.vectors.resize(n, n);
  for (int i = 0; i < n; ++i) {
    out.values(i) = raw(order[static_cast<std::size_t>(i)]);
    out.vectors.col(i) = solver.eigenvectors().col(order[static_cast<std::size_t>(i)]);
  }
  return out;
}

namespace {

std::vector<double> top_magnitudes(const Eigen::MatrixXd& c, int k,
                                   EigenMode mode) {
  std::vector<double> mags;
  if (mode == EigenMode::Symmetrize) {
    const SymmetricEigen eig = eigen_symmetric(symmetrize(c));
    mags.reserve(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) mags.push_back(std::abs(eig.values(i)));
  } else {
    Eigen::EigenSolver<Eigen::MatrixXd> solver(c, /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success) {
      throw NumericalError("eigendecomposition failed to converge");
    }
    const auto& vals = solver.eigenvalues();
    std::vector<double> all(static_cast<std::size_t>(vals.size()));
    for (Eigen::Index i = 0; i < vals.size(); ++i) all[static_cast<std::size_t>(i)] = std::abs(vals(i));
    std::stable_sort(all.begin(), all.end(), std::greater<>());
    mags.assign(all.begin(), all.begin() + k);
  }
  return mags;
}

}  // namespace

EigenSequence eigen_sequence(const Eigen::MatrixXd& values, int H, int k, int d,
                             int S, EigenMode mode) {
  const int n = static_cast<int>(values.rows());
  const int T = static_cast<int>(values.cols());
  if (H < 0) throw SpecError("max lag H must be nonnegative");
  if (H >= T) {
    throw LagTooLarge("max lag " + std::to_string(H) +
                      " requires T > H, panel has T=" + std::to_string(T));
  }
  if (k < 1 || k > n) {
    throw SpecError("top-k must satisfy 1 <= k <= n, got k=" +
                    std::to_string(k) + " with n=" + std::to_string(n));
  }
  EigenSequence seq;
  seq.k = k;
  seq.lags.resize(static_cast<std::size_t>(H) + 1);
  seq.magnitudes.resize(static_cast<std::size_t>(H) + 1);
  for (int h = 0; h <= H; ++h) {
    seq.lags[static_cast<std::size_t>(h)] = h;
    seq.magnitudes[static_cast<std::size_t>(h)] =
        top_magnitudes(sgcv(values, h, d, S).matrix, k, mode);
  }
  return seq;
}

EigenSequence eigen_sequence(const Panel& panel, int H, int k, int d, int S,
                             EigenMode mode) {
  if (panel.any_missing()) {
    throw MissingDataError("eigen_sequence requires a fully observed panel");
  }
  return eigen_sequence(panel.values, H, k, d, S, mode);
}

void write_eigens_csv(const EigenSequence& seq,
                      const std::filesystem::path& path) {
  std::string out = "h,rank,magnitude\n";
  for (std::size_t li = 0; li < seq.lags.size(); ++li) {
    for (int r = 0; r < seq.k; ++r) {
      out += std::to_string(seq.lags[li]);
      out += ',' + std::to_string(r + 1);
      out += ',' + format_double(seq.magnitudes[li][static_cast<std::size_t>(r)]);
      out += '\n';
    }
  }
  atomic_write(path, out);
}

void write_eigens_svg(const EigenSequence& seq,
                      const std::filesystem::path& path) {
  LineChart chart("Top eigenvalue magnitudes of C(h)", "lag h", "|eigenvalue|");
  for (int r = 0; r < seq.k; ++r) {
    SvgSeries series;
    series.color = palette_color(r);
    series.stroke_width = r == 0 ? 2.0 : 1.2;
    series.label = "rank " + std::to_string(r + 1);
    for (std::size_t li = 0; li < seq.lags.size(); ++li) {
      series.x.push_back(static_cast<double>(seq.lags[li]));
      series.y.push_back(seq.magnitudes[li][static_cast<std::size_t>(r)]);
    }
    chart.add(std::move(series));
  }
  chart.write(path);
}

}  // namespace sdfm
