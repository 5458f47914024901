#include "sdfm/sarima.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>
#include <boost/math/distributions/chi_squared.hpp>
#include <nlohmann/json.hpp>

#include "sdfm/errors.hpp"
#include "sdfm/io.hpp"
#include "sdfm/nelder_mead.hpp"
#include "sdfm/rng.hpp"
#include "sdfm/svg.hpp"

namespace sdfm {

void SarimaSpec::validate() const {
  if (p < 0 || d < 0 || q < 0 || P < 0 || D < 0 || Q < 0) {
    throw SpecError("SARIMA orders must be nonnegative");
  }
  if (S < 2) throw SpecError("season length S must be >= 2");
  if (d + D > 2) {
    throw SpecError("total differencing d + D = " + std::to_string(d + D) +
                    " exceeds the supported maximum of 2");
  }
}

std::vector<double> seasonal_difference(std::span<const double> x, int d,
                                        int D, int S) {
  if (d < 0 || D < 0) throw SpecError("differencing orders must be nonnegative");
  if (S < 2) throw SpecError("season length S must be >= 2");
  const int drop = d + D * S;
  if (static_cast<int>(x.size()) <= drop) {
    throw LengthError("series of length " + std::to_string(x.size()) +
                      " is too short for d=" + std::to_string(d) +
                      ", D=" + std::to_string(D) + ", S=" + std::to_string(S));
  }
  std::vector<double> out(x.begin(), x.end());
  for (int round = 0; round < d; ++round) {
    std::vector<double> next(out.size() - 1);
    for (std::size_t t = 1; t < out.size(); ++t) next[t - 1] = out[t] - out[t - 1];
    out = std::move(next);
  }
  const std::size_t lag = static_cast<std::size_t>(S);
  for (int round = 0; round < D; ++round) {
    std::vector<double> next(out.size() - lag);
    for (std::size_t t = lag; t < out.size(); ++t) next[t - lag] = out[t] - out[t - lag];
    out = std::move(next);
  }
  return out;
}

namespace {

void check_param_lengths(const SarimaSpec& spec, const SarimaParams& params) {
  if (static_cast<int>(params.ar.size()) != spec.p ||
      static_cast<int>(params.ma.size()) != spec.q ||
      static_cast<int>(params.sar.size()) != spec.P ||
      static_cast<int>(params.sma.size()) != spec.Q) {
    throw SpecError("parameter lengths (" + std::to_string(params.ar.size()) + "," +
                    std::to_string(params.ma.size()) + "," +
                    std::to_string(params.sar.size()) + "," +
                    std::to_string(params.sma.size()) +
                    ") do not match the SARIMA orders");
  }
}

}  // namespace

std::vector<double> expand_ar(const SarimaSpec& spec,
                              std::span<const double> ar,
                              std::span<const double> sar) {
  std::vector<double> phi(static_cast<std::size_t>(spec.p + spec.P * spec.S), 0.0);
  for (int i = 1; i <= spec.p; ++i) phi[i - 1] = ar[i - 1];
  for (int j = 1; j <= spec.P; ++j) {
    phi[j * spec.S - 1] += sar[j - 1];
    for (int i = 1; i <= spec.p; ++i) {
      phi[i + j * spec.S - 1] -= ar[i - 1] * sar[j - 1];
    }
  }
  return phi;
}

std::vector<double> expand_ma(const SarimaSpec& spec,
                              std::span<const double> ma,
                              std::span<const double> sma) {
  std::vector<double> theta(static_cast<std::size_t>(spec.q + spec.Q * spec.S), 0.0);
  for (int i = 1; i <= spec.q; ++i) theta[i - 1] = ma[i - 1];
  for (int j = 1; j <= spec.Q; ++j) {
    theta[j * spec.S - 1] += sma[j - 1];
    for (int i = 1; i <= spec.q; ++i) {
      theta[i + j * spec.S - 1] += ma[i - 1] * sma[j - 1];
    }
  }
  return theta;
}

bool roots_outside_unit_circle(const std::vector<double>& coeffs,
                               double margin) {
  std::size_t degree = coeffs.size();
  while (degree > 0 && coeffs[degree - 1] == 0.0) --degree;
  if (degree == 0) return true;

  // Roots of 1 + sum c_i z^i lie outside radius 1 + margin exactly when the
  // monic reciprocal polynomial z^m + c_1 z^{m-1} + ... + c_m keeps all of
  // its roots inside radius 1 / (1 + margin).
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(
      static_cast<Eigen::Index>(degree), static_cast<Eigen::Index>(degree));
  for (std::size_t i = 1; i < degree; ++i) {
    companion(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i) - 1) = 1.0;
  }
  for (std::size_t j = 0; j < degree; ++j) {
    companion(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(degree) - 1) =
        -coeffs[degree - 1 - j];
  }
  const Eigen::VectorXcd roots =
      Eigen::EigenSolver<Eigen::MatrixXd>(companion, false).eigenvalues();
  const double bound = 1.0 / (1.0 + margin);
  for (Eigen::Index i = 0; i < roots.size(); ++i) {
    if (std::abs(roots(i)) >= bound) return false;
  }
  return true;
}

namespace {

std::vector<double> negated(std::span<const double> v) {
  std::vector<double> out(v.begin(), v.end());
  for (double& c : out) c = -c;
  return out;
}

}  // namespace

bool params_feasible(const SarimaSpec& spec, const SarimaParams& params,
                     double margin) {
  check_param_lengths(spec, params);
  return roots_outside_unit_circle(negated(params.ar), margin) &&
         roots_outside_unit_circle(negated(params.sar), margin) &&
         roots_outside_unit_circle(params.ma, margin) &&
         roots_outside_unit_circle(params.sma, margin);
}

namespace {

// Innovations of the multiplicative ARMA recursion with zero pre-sample
// values: e_t = w_t - sum phi_k w_{t-k} - sum theta_k e_{t-k}.
CssResult css_expanded(std::span<const double> x,
                       const std::vector<double>& phi,
                       const std::vector<double>& theta) {
  const std::size_t n = x.size();
  CssResult out;
  out.residuals.resize(n);
  for (std::size_t t = 0; t < n; ++t) {
    double e = x[t];
    for (std::size_t k = 1; k <= phi.size() && k <= t; ++k) {
      e -= phi[k - 1] * x[t - k];
    }
    for (std::size_t k = 1; k <= theta.size() && k <= t; ++k) {
      e -= theta[k - 1] * out.residuals[t - k];
    }
    out.residuals[t] = e;
    out.css += e * e;
  }
  return out;
}

}  // namespace

CssResult css(std::span<const double> x, const SarimaSpec& spec,
              const SarimaParams& params) {
  spec.validate();
  if (x.empty()) throw LengthError("css needs a nonempty series");
  if (!params_feasible(spec, params)) {
    throw ConstraintError("SARIMA parameters violate the root constraints");
  }
  return css_expanded(x, expand_ar(spec, params.ar, params.sar),
                      expand_ma(spec, params.ma, params.sma));
}

namespace {

SarimaParams unpack_params(const SarimaSpec& spec, const Eigen::VectorXd& v) {
  SarimaParams params;
  int at = 0;
  params.ar.assign(v.data() + at, v.data() + at + spec.p);
  at += spec.p;
  params.ma.assign(v.data() + at, v.data() + at + spec.q);
  at += spec.q;
  params.sar.assign(v.data() + at, v.data() + at + spec.P);
  at += spec.P;
  params.sma.assign(v.data() + at, v.data() + at + spec.Q);
  return params;
}

}  // namespace

SarimaFit fit_sarima(std::span<const double> x, const SarimaSpec& spec) {
  spec.validate();
  const std::vector<double> w = seasonal_difference(x, spec.d, spec.D, spec.S);
  const int n_eff = static_cast<int>(w.size());
  const int n_par = spec.n_params();
  if (n_eff < 10 * (n_par + 1)) {
    throw LengthError("effective sample of " + std::to_string(n_eff) +
                      " after differencing is below the required " +
                      std::to_string(10 * (n_par + 1)));
  }

  SarimaFit fit;
  fit.spec = spec;

  if (n_par == 0) {
    const CssResult base = css_expanded(w, {}, {});
    fit.css = base.css;
    fit.residuals = base.residuals;
    fit.sigma2 = base.css / n_eff;
    fit.converged = true;
    return fit;
  }

  constexpr double kMargin = 1e-6;
  const auto objective = [&](const Eigen::VectorXd& v) {
    const SarimaParams params = unpack_params(spec, v);
    if (!params_feasible(spec, params, kMargin)) {
      return std::numeric_limits<double>::infinity();
    }
    return css_expanded(w, expand_ar(spec, params.ar, params.sar),
                        expand_ma(spec, params.ma, params.sma))
        .css;
  };

  std::vector<Eigen::VectorXd> starts;
  starts.push_back(Eigen::VectorXd::Zero(n_par));
  for (std::uint64_t s = 1; s <= 4; ++s) {
    Rng rng(derive_seed(0x5a81u, s));
    for (int attempt = 0; attempt < 200; ++attempt) {
      Eigen::VectorXd candidate(n_par);
      for (int i = 0; i < n_par; ++i) candidate(i) = rng.uniform(-0.5, 0.5);
      if (std::isfinite(objective(candidate))) {
        starts.push_back(candidate);
        break;
      }
    }
  }
  std::erase_if(starts,
                [&](const Eigen::VectorXd& v) { return !std::isfinite(objective(v)); });
  if (starts.empty()) throw FitError("no feasible starting point found");

  NelderMeadResult best;
  best.fx = std::numeric_limits<double>::infinity();
  for (const Eigen::VectorXd& start : starts) {
    const NelderMeadResult run = nelder_mead(objective, start);
    if (run.fx < best.fx) best = run;
  }

  const SarimaParams params = unpack_params(spec, best.x);
  const CssResult final_css =
      css_expanded(w, expand_ar(spec, params.ar, params.sar),
                   expand_ma(spec, params.ma, params.sma));
  fit.ar = params.ar;
  fit.ma = params.ma;
  fit.sar = params.sar;
  fit.sma = params.sma;
  fit.css = final_css.css;
  fit.residuals = final_css.residuals;
  fit.sigma2 = final_css.css / n_eff;
  fit.converged = best.converged;
  fit.iterations = best.iterations;
  return fit;
}

std::vector<double> simulate_sarima(const SarimaSpec& spec,
                                    const SarimaParams& params, int T,
                                    std::uint64_t seed, int burn_in) {
  spec.validate();
  if (T < 1) throw SpecError("simulate_sarima needs T >= 1");
  if (burn_in < 10 * spec.S) {
    throw SpecError("burn_in of " + std::to_string(burn_in) +
                    " is below the required 10*S = " + std::to_string(10 * spec.S));
  }
  if (!(params.sigma2 > 0.0)) {
    throw SpecError("sigma2 must be positive");
  }
  if (!params_feasible(spec, params)) {
    throw ConstraintError("SARIMA parameters violate the root constraints");
  }

  const std::vector<double> phi = expand_ar(spec, params.ar, params.sar);
  const std::vector<double> theta = expand_ma(spec, params.ma, params.sma);
  const std::size_t total = static_cast<std::size_t>(burn_in) + static_cast<std::size_t>(T);
  const double sd = std::sqrt(params.sigma2);

  Rng rng(seed);
  std::vector<double> e(total);
  for (double& value : e) value = sd * rng.normal();

  std::vector<double> w(total);
  for (std::size_t t = 0; t < total; ++t) {
    double value = e[t];
    for (std::size_t k = 1; k <= phi.size() && k <= t; ++k) {
      value += phi[k - 1] * w[t - k];
    }
    for (std::size_t k = 1; k <= theta.size() && k <= t; ++k) {
      value += theta[k - 1] * e[t - k];
    }
    w[t] = value;
  }

  const std::size_t lag = static_cast<std::size_t>(spec.S);
  for (int round = 0; round < spec.D; ++round) {
    for (std::size_t t = lag; t < total; ++t) w[t] += w[t - lag];
  }
  for (int round = 0; round < spec.d; ++round) {
    for (std::size_t t = 1; t < total; ++t) w[t] += w[t - 1];
  }

  return {w.begin() + burn_in, w.end()};
}

LjungBox ljung_box(std::span<const double> residuals, int lags,
                   int fitted_params) {
  const int n = static_cast<int>(residuals.size());
  if (lags < 1) throw SpecError("ljung_box needs lags >= 1");
  if (fitted_params < 0) throw SpecError("fitted_params must be nonnegative");
  if (lags <= fitted_params) {
    throw SpecError("lags (" + std::to_string(lags) +
                    ") must exceed fitted_params (" + std::to_string(fitted_params) + ")");
  }
  if (n <= lags) {
    throw LengthError("series of length " + std::to_string(n) +
                      " is too short for " + std::to_string(lags) + " lags");
  }

  double mean = 0.0;
  for (double value : residuals) mean += value;
  mean /= n;
  double denom = 0.0;
  for (double value : residuals) denom += (value - mean) * (value - mean);
  if (denom == 0.0) {
    throw DegenerateSeriesError("residual series has zero variance");
  }

  LjungBox out;
  double q = 0.0;
  for (int k = 1; k <= lags; ++k) {
    double acov = 0.0;
    for (int t = k; t < n; ++t) {
      acov += (residuals[t] - mean) * (residuals[t - k] - mean);
    }
    const double rho = acov / denom;
    q += rho * rho / (n - k);
  }
  out.statistic = static_cast<double>(n) * (n + 2) * q;
  const boost::math::chi_squared dist(lags - fitted_params);
  out.p_value = boost::math::cdf(boost::math::complement(dist, out.statistic));
  return out;
}

MonthlyPattern monthly_pattern(std::span<const double> x,
                               const TimeIndex& time) {
  if (static_cast<int>(x.size()) != time.length) {
    throw ShapeError("series length " + std::to_string(x.size()) +
                     " does not match the time index length " +
                     std::to_string(time.length));
  }
  MonthlyPattern pattern;
  for (int t = 1; t <= time.length; ++t) {
    const int m = time.month_of(t);
    pattern.values[m - 1].emplace_back(time.year_of(t), x[t - 1]);
  }
  for (int m = 0; m < 12; ++m) {
    const auto& cells = pattern.values[m];
    if (cells.empty()) {
      pattern.means[m] = std::numeric_limits<double>::quiet_NaN();
      continue;
    }
    double sum = 0.0;
    for (const auto& [year, value] : cells) sum += value;
    pattern.means[m] = sum / static_cast<double>(cells.size());
  }
  return pattern;
}

void write_pattern_csv(const MonthlyPattern& pattern,
                       const std::filesystem::path& path) {
  std::string body = "month,year,value\n";
  for (int m = 0; m < 12; ++m) {
    for (const auto& [year, value] : pattern.values[m]) {
      body += std::to_string(m + 1) + "," + std::to_string(year) + "," +
              format_double(value) + "\n";
    }
  }
  atomic_write(path, body);
}

void write_pattern_means_csv(const MonthlyPattern& pattern,
                             const std::filesystem::path& path) {
  std::string body = "month,mean\n";
  for (int m = 0; m < 12; ++m) {
    body += std::to_string(m + 1) + ",";
    body += std::isnan(pattern.means[m]) ? "NA" : format_double(pattern.means[m]);
    body += "\n";
  }
  atomic_write(path, body);
}

void write_pattern_svg(const MonthlyPattern& pattern,
                       const std::filesystem::path& path) {
  std::vector<int> years;
  for (int m = 0; m < 12; ++m) {
    for (const auto& [year, value] : pattern.values[m]) {
      if (std::find(years.begin(), years.end(), year) == years.end()) {
        years.push_back(year);
      }
    }
  }
  std::sort(years.begin(), years.end());

  LineChart chart("Seasonal pattern", "month", "value");
  for (const int year : years) {
    SvgSeries series;
    series.color = "#b8c4cc";
    series.stroke_width = 1.0;
    series.label = std::to_string(year);
    for (int m = 0; m < 12; ++m) {
      for (const auto& [cell_year, value] : pattern.values[m]) {
        if (cell_year == year) {
          series.x.push_back(m + 1);
          series.y.push_back(value);
          break;
        }
      }
    }
    chart.add(std::move(series));
  }

  SvgSeries mean_series;
  mean_series.color = "#1f77b4";
  mean_series.stroke_width = 2.5;
  mean_series.label = "mean";
  for (int m = 0; m < 12; ++m) {
    if (!std::isnan(pattern.means[m])) {
      mean_series.x.push_back(m + 1);
      mean_series.y.push_back(pattern.means[m]);
    }
  }
  chart.add(std::move(mean_series));
  chart.write(path);
}

void write_sarima_json(const SarimaFit& fit, const std::filesystem::path& path,
                       int lb_lags) {
  nlohmann::ordered_json j;
  j["orders"] = {{"p", fit.spec.p}, {"d", fit.spec.d}, {"q", fit.spec.q},
                 {"P", fit.spec.P}, {"D", fit.spec.D}, {"Q", fit.spec.Q},
                 {"S", fit.spec.S}};
  j["ar"] = fit.ar;
  j["ma"] = fit.ma;
  j["sar"] = fit.sar;
  j["sma"] = fit.sma;
  j["sigma2"] = fit.sigma2;
  j["css"] = fit.css;
  j["converged"] = fit.converged;
  j["iterations"] = fit.iterations;
  try {
    const LjungBox lb = ljung_box(fit.residuals, lb_lags, fit.spec.n_params());
    j["ljung_box"] = {{"lags", lb_lags},
                      {"statistic", lb.statistic},
                      {"p_value", lb.p_value}};
  } catch (const Error&) {
    // Too short or degenerate for the whiteness test; leave the block out.
  }
  atomic_write(path, j.dump(2) + "\n");
}

}  // namespace sdfm
