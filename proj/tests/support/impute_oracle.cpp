#include "impute_oracle.hpp"

#include <cmath>
#include <stdexcept>

namespace sdfm_test {

namespace {

// One series. `orig` is the hole pattern before any filling, `now` tracks the
// sequential state. Indices are one-based here to stay close to the formulas.
double fill_one(const Eigen::VectorXd& x, const Eigen::Array<bool, Eigen::Dynamic, 1>& now,
                const Eigen::Array<bool, Eigen::Dynamic, 1>& orig, int t) {
  const int T = static_cast<int>(x.size());
  auto have_now = [&](int u) { return u >= 1 && u <= T && !now(u - 1); };
  auto have_orig = [&](int u) { return u >= 1 && u <= T && !orig(u - 1); };
  auto val = [&](int u) { return x(u - 1); };

  if (t > 25) {
    // Past same-month values over up to five years.
    int y1 = (t - 1) / 12;
    if (y1 > 5) y1 = 5;
    int y2 = (t - 2) / 12;
    if (y2 > 5) y2 = 5;
    if (y1 < 1 || y2 < 1) throw std::runtime_error("oracle: no history");
    double sum1 = 0.0;
    for (int i = 1; i <= y1; ++i) {
      if (!have_now(t - 12 * i)) throw std::runtime_error("oracle: past value missing");
      sum1 += val(t - 12 * i);
    }
    double sum2 = 0.0;
    for (int i = 1; i <= y2; ++i) {
      if (!have_now(t - 12 * i) || !have_now(t - 12 * i - 1))
        throw std::runtime_error("oracle: past difference missing");
      sum2 += val(t - 12 * i) - val(t - 12 * i - 1);
    }
    if (!have_now(t - 1)) throw std::runtime_error("oracle: previous value missing");
    const double xh1 = sum1 / y1;
    const double xh2 = val(t - 1) + sum2 / y2;
    return 0.5 * (xh1 + xh2);
  }

  // 2 <= t <= 25: future same-month values, screened by the original mask.
  if (t < 2) throw std::runtime_error("oracle: t = 1 hole");
  int z1 = 0;
  double sum1 = 0.0;
  for (int i = 1; i <= 5; ++i) {
    const int u = t + 12 * i;
    if (have_orig(u)) {
      sum1 += val(u);
      ++z1;
    }
  }
  int z2 = 0;
  double sum2 = 0.0;
  for (int i = 1; i <= 5; ++i) {
    const int u = t + 12 * i;
    if (have_orig(u) && have_orig(u - 1)) {
      sum2 += val(u) - val(u - 1);
      ++z2;
    }
  }
  if (z1 < 1 || z2 < 1) throw std::runtime_error("oracle: no usable future values");
  if (!have_now(t - 1)) throw std::runtime_error("oracle: previous value missing");
  const double xh1 = sum1 / z1;
  const double xh2 = val(t - 1) + sum2 / z2;
  return 0.5 * (xh1 + xh2);
}

}  // namespace

Eigen::MatrixXd impute_oracle(const Eigen::MatrixXd& values,
                              const Eigen::Array<bool, Eigen::Dynamic,
                                                 Eigen::Dynamic>& missing) {
  if (values.rows() != missing.rows() || values.cols() != missing.cols())
    throw std::runtime_error("oracle: shape mismatch");
  Eigen::MatrixXd out = values;
  const int T = static_cast<int>(values.cols());
  for (int i = 0; i < values.rows(); ++i) {
    Eigen::VectorXd x = values.row(i).transpose();
    Eigen::Array<bool, Eigen::Dynamic, 1> orig = missing.row(i).transpose();
    Eigen::Array<bool, Eigen::Dynamic, 1> now = orig;
    if (orig(0)) throw std::runtime_error("oracle: first observation missing");
    for (int t = 1; t <= T; ++t) {
      if (!now(t - 1)) continue;
      x(t - 1) = fill_one(x, now, orig, t);
      now(t - 1) = false;
    }
    out.row(i) = x.transpose();
  }
  if (!out.allFinite()) throw std::runtime_error("oracle: non-finite result");
  return out;
}

}  // namespace sdfm_test
