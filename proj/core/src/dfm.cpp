#include "sdfm/dfm.hpp"

#include <cmath>
#include <string>

#include <nlohmann/json.hpp>

#include "sdfm/errors.hpp"
#include "sdfm/io.hpp"

namespace sdfm {

void FactorSpec::validate(int n) const {
  if (r1 < 0 || r2 < 0 || r3 < 0) {
    throw SpecError("factor counts must be nonnegative, got r1=" +
                    std::to_string(r1) + " r2=" + std::to_string(r2) +
                    " r3=" + std::to_string(r3));
  }
  if (r() < 1) throw SpecError("at least one factor is required");
  if (n >= 0 && r() > n) {
    throw SpecError("requested " + std::to_string(r()) + " factors from a panel of " +
                    std::to_string(n) + " series");
  }
  if (d < 1) throw SpecError("differencing order d must be >= 1");
  if (S < 2) throw SpecError("season length S must be >= 2");
  if (h < 0) throw SpecError("lag h must be nonnegative");
  if (r2 >= 1 && (h < S || h % S != 0)) {
    throw SpecError("seasonal factors need h to be a positive multiple of S, got h=" +
                    std::to_string(h) + " with S=" + std::to_string(S));
  }
}

Eigen::MatrixXd apply_sign_convention(Eigen::MatrixXd vectors) {
  constexpr double kSumTie = 1e-12;
  for (Eigen::Index j = 0; j < vectors.cols(); ++j) {
    const double col_sum = vectors.col(j).sum();
    if (col_sum < -kSumTie) {
      vectors.col(j) = -vectors.col(j);
    } else if (std::abs(col_sum) <= kSumTie) {
      Eigen::Index arg_max = 0;
      vectors.col(j).cwiseAbs().maxCoeff(&arg_max);
      if (vectors(arg_max, j) < 0.0) vectors.col(j) = -vectors.col(j);
    }
  }
  return vectors;
}

namespace {

// Shared by estimate_nonstationary and fit so the fit also keeps the
// eigenvalues behind the selected loadings.
void nonstationary_pca(const Panel& panel, const FactorSpec& spec,
                       Eigen::MatrixXd& loadings, Eigen::MatrixXd& factors,
                       Eigen::VectorXd& eigenvalues) {
  const SgcvMatrix c = sgcv(panel, spec.h, spec.d, spec.S);
  const SymmetricEigen eig = eigen_symmetric(symmetrize(c.matrix));
  const int r_ns = spec.r_ns();
  loadings = apply_sign_convention(eig.vectors.leftCols(r_ns));
  eigenvalues = eig.values.head(r_ns);
  factors = loadings.transpose() * panel.values;
}

}  // namespace

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> estimate_nonstationary(
    const Panel& panel, const FactorSpec& spec) {
  spec.validate(panel.n());
  if (spec.r_ns() < 1) {
    throw SpecError("estimate_nonstationary needs r1 + r2 >= 1");
  }
  if (panel.any_missing()) {
    throw MissingDataError("panel passed to estimate_nonstationary has " +
                           std::to_string(panel.missing_count()) +
                           " missing cells; impute first");
  }
  Eigen::MatrixXd loadings, factors;
  Eigen::VectorXd eigenvalues;
  nonstationary_pca(panel, spec, loadings, factors, eigenvalues);
  return {std::move(loadings), std::move(factors)};
}

namespace {

void stationary_pca(const Eigen::MatrixXd& residuals, int r3,
                    Eigen::MatrixXd& loadings, Eigen::MatrixXd& factors,
                    Eigen::VectorXd& eigenvalues) {
  const Eigen::Index n = residuals.rows();
  const Eigen::Index T = residuals.cols();
  if (r3 < 1) throw SpecError("estimate_stationary needs r3 >= 1");
  if (r3 > n) {
    throw SpecError("requested " + std::to_string(r3) + " stationary factors from " +
                    std::to_string(n) + " residual series");
  }
  if (T < 2) throw SpecError("stationary PCA needs at least two time points");
  if (!residuals.allFinite()) {
    throw MissingDataError("residual matrix has non-finite entries");
  }
  if (residuals.cwiseAbs().maxCoeff() == 0.0) {
    throw SpecError("stationary PCA on an all-zero residual matrix");
  }

  const Eigen::VectorXd row_means = residuals.rowwise().mean();
  const Eigen::MatrixXd centered = residuals.colwise() - row_means;
  const Eigen::MatrixXd cov =
      centered * centered.transpose() / static_cast<double>(T - 1);
  const SymmetricEigen eig = eigen_symmetric(cov);
  loadings = apply_sign_convention(eig.vectors.leftCols(r3));
  eigenvalues = eig.values.head(r3);
  factors = loadings.transpose() * centered;
}

}  // namespace

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> estimate_stationary(
    const Eigen::MatrixXd& residuals, int r3) {
  Eigen::MatrixXd loadings, factors;
  Eigen::VectorXd eigenvalues;
  stationary_pca(residuals, r3, loadings, factors, eigenvalues);
  return {std::move(loadings), std::move(factors)};
}

DfmFit fit(const Panel& panel, const FactorSpec& spec) {
  panel.validate();
  spec.validate(panel.n());
  if (panel.any_missing()) {
    throw MissingDataError("panel passed to fit has " +
                           std::to_string(panel.missing_count()) +
                           " missing cells; impute first");
  }

  const int n = panel.n();
  const int T = panel.T();
  const int r_ns = spec.r_ns();
  const int r = spec.r();

  DfmFit out;
  out.spec = spec;
  out.loadings.resize(n, r);
  out.factors.resize(r, T);

  Eigen::MatrixXd resid_ns = panel.values;
  if (r_ns >= 1) {
    Eigen::MatrixXd loadings_ns, factors_ns;
    nonstationary_pca(panel, spec, loadings_ns, factors_ns, out.eigenvalues_ns);
    out.loadings.leftCols(r_ns) = loadings_ns;
    out.factors.topRows(r_ns) = factors_ns;
    resid_ns -= loadings_ns * factors_ns;
  }
  if (spec.r3 >= 1) {
    Eigen::MatrixXd loadings_st, factors_st;
    stationary_pca(resid_ns, spec.r3, loadings_st, factors_st, out.eigenvalues_st);
    out.loadings.rightCols(spec.r3) = loadings_st;
    out.factors.bottomRows(spec.r3) = factors_st;
  }

  out.common = out.loadings * out.factors;
  out.residuals = panel.values - out.common;

  const double total = panel.values.squaredNorm();
  out.explained.resize(static_cast<std::size_t>(r));
  for (int i = 1; i <= r; ++i) {
    const double kept =
        (panel.values - out.loadings.leftCols(i) * out.factors.topRows(i))
            .squaredNorm();
    out.explained[static_cast<std::size_t>(i) - 1] =
        total > 0.0 ? 1.0 - kept / total : 1.0;
  }
  return out;
}

EigenSequence refit_residual_diagnostic(const DfmFit& fit, int H, int k,
                                        EigenMode mode) {
  return eigen_sequence(fit.residuals, H, k, fit.spec.d, fit.spec.S, mode);
}

namespace {

void write_matrix_by_time(const Eigen::MatrixXd& values, const Panel& panel,
                          const std::filesystem::path& path) {
  std::string body = "date";
  for (const auto& station : panel.stations) body += "," + station.id;
  body += "\n";
  for (int t = 1; t <= panel.T(); ++t) {
    body += panel.time.label(t);
    for (int i = 0; i < panel.n(); ++i) {
      body += "," + format_double(values(i, t - 1));
    }
    body += "\n";
  }
  atomic_write(path, body);
}

}  // namespace

void save_fit(const DfmFit& fit, const Panel& panel,
              const std::filesystem::path& dir) {
  const int n = static_cast<int>(fit.loadings.rows());
  const int r = static_cast<int>(fit.loadings.cols());
  const int T = static_cast<int>(fit.factors.cols());
  if (n != panel.n() || T != panel.T()) {
    throw ShapeError("fit dimensions (" + std::to_string(n) + "x" + std::to_string(T) +
                     ") do not match the panel (" + std::to_string(panel.n()) + "x" +
                     std::to_string(panel.T()) + ")");
  }

  std::string loadings_csv = "station";
  for (int j = 1; j <= r; ++j) loadings_csv += ",factor_" + std::to_string(j);
  loadings_csv += "\n";
  for (int i = 0; i < n; ++i) {
    loadings_csv += panel.stations[static_cast<std::size_t>(i)].id;
    for (int j = 0; j < r; ++j) loadings_csv += "," + format_double(fit.loadings(i, j));
    loadings_csv += "\n";
  }
  atomic_write(dir / "loadings.csv", loadings_csv);

  std::string factors_csv = "date";
  for (int j = 1; j <= r; ++j) factors_csv += ",factor_" + std::to_string(j);
  factors_csv += "\n";
  for (int t = 1; t <= T; ++t) {
    factors_csv += panel.time.label(t);
    for (int j = 0; j < r; ++j) factors_csv += "," + format_double(fit.factors(j, t - 1));
    factors_csv += "\n";
  }
  atomic_write(dir / "factors.csv", factors_csv);

  write_matrix_by_time(fit.common, panel, dir / "common.csv");
  write_matrix_by_time(fit.residuals, panel, dir / "residuals.csv");

  nlohmann::ordered_json j;
  j["spec"] = {{"r1", fit.spec.r1}, {"r2", fit.spec.r2}, {"r3", fit.spec.r3},
               {"h", fit.spec.h},   {"d", fit.spec.d},   {"S", fit.spec.S}};
  j["explained"] = fit.explained;
  j["eigenvalues_nonstationary"] =
      std::vector<double>(fit.eigenvalues_ns.data(),
                          fit.eigenvalues_ns.data() + fit.eigenvalues_ns.size());
  j["eigenvalues_stationary"] =
      std::vector<double>(fit.eigenvalues_st.data(),
                          fit.eigenvalues_st.data() + fit.eigenvalues_st.size());
  atomic_write(dir / "fit.json", j.dump(2) + "\n");
}

}  // namespace sdfm
