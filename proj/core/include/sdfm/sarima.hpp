#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sdfm/time_index.hpp"

namespace sdfm {

// Multiplicative seasonal ARIMA orders (p,d,q)(P,D,Q)_S.
struct SarimaSpec {
  int p = 0, d = 0, q = 0;
  int P = 0, D = 0, Q = 0;
  int S = 12;

  int n_params() const { return p + q + P + Q; }
  void validate() const;  // nonnegative orders, S >= 2, d + D <= 2
};

struct SarimaParams {
  std::vector<double> ar;   // length p
  std::vector<double> ma;   // length q
  std::vector<double> sar;  // length P
  std::vector<double> sma;  // length Q
  double sigma2 = 1.0;      // innovation variance
};

struct SarimaFit {
  SarimaSpec spec;
  std::vector<double> ar, ma, sar, sma;
  double sigma2 = 0.0;
  double css = 0.0;
  std::vector<double> residuals;  // innovations of the differenced series
  bool converged = false;
  int iterations = 0;
};

// Applies (1-B)^d then (1-B^S)^D; output length = len - d - D*S.
std::vector<double> seasonal_difference(std::span<const double> x, int d,
                                        int D, int S);

// Expanded regular-times-seasonal polynomials. The AR product
// (1 - sum ar_i B^i)(1 - sum sar_j B^{jS}) yields coefficients phi with
// w_t = sum phi_k w_{t-k} + ...; the MA product (1 + sum ma_i B^i)
// (1 + sum sma_j B^{jS}) yields theta with e-lags entering positively.
std::vector<double> expand_ar(const SarimaSpec& spec,
                              std::span<const double> ar,
                              std::span<const double> sar);
std::vector<double> expand_ma(const SarimaSpec& spec,
                              std::span<const double> ma,
                              std::span<const double> sma);

// True when every root of 1 + sum_{i} coeffs[i-1] z^i has modulus
// > 1 + margin. Pass negated AR coefficients for stability checks.
bool roots_outside_unit_circle(const std::vector<double>& coeffs,
                               double margin);

// Stability/invertibility of all four polynomials with the given margin.
bool params_feasible(const SarimaSpec& spec, const SarimaParams& params,
                     double margin = 1e-6);

struct CssResult {
  double css = 0.0;
  std::vector<double> residuals;
};

// Conditional sum of squares on an already differenced series: innovations
// from the multiplicative ARMA recursion with pre-sample observations and
// innovations set to zero; css = sum of squared innovations.
CssResult css(std::span<const double> x, const SarimaSpec& spec,
              const SarimaParams& params);

// Minimizes css over the constrained parameters with multi-start Nelder-Mead
// (all-zeros plus 4 seeded random feasible starts; infeasible points rejected
// by +inf barrier). sigma2 = css / length of the differenced series.
SarimaFit fit_sarima(std::span<const double> x, const SarimaSpec& spec);

// Draws Gaussian innovations from `seed`, runs the ARMA recursion, integrates
// D times seasonally and d times regularly over the full span, then discards
// the first `burn_in` points. Deterministic per seed.
std::vector<double> simulate_sarima(const SarimaSpec& spec,
                                    const SarimaParams& params, int T,
                                    std::uint64_t seed, int burn_in = 120);

struct LjungBox {
  double statistic = 0.0;
  double p_value = 1.0;
};

// Portmanteau whiteness test; chi-square reference on
// (lags - fitted_params) degrees of freedom.
LjungBox ljung_box(std::span<const double> residuals, int lags,
                   int fitted_params);

// Calendar-month summary behind the seasonal-pattern figures: per month, the
// year-by-year values and their mean. Months with no observed value keep an
// empty list and a NaN mean.
struct MonthlyPattern {
  std::array<double, 12> means{};
  std::array<std::vector<std::pair<int, double>>, 12> values{};  // (year, value)
};

MonthlyPattern monthly_pattern(std::span<const double> x,
                               const TimeIndex& time);

// CSV columns: month,year,value (one row per observed month/year cell).
void write_pattern_csv(const MonthlyPattern& pattern,
                       const std::filesystem::path& path);

// CSV columns: month,mean.
void write_pattern_means_csv(const MonthlyPattern& pattern,
                             const std::filesystem::path& path);

// One light polyline per year over months 1..12 plus a bold mean line.
void write_pattern_svg(const MonthlyPattern& pattern,
                       const std::filesystem::path& path);

// JSON with orders, coefficients, sigma2, css, converged, and a Ljung-Box
// block at `lb_lags` lags (omitted when the residual series is too short).
void write_sarima_json(const SarimaFit& fit, const std::filesystem::path& path,
                       int lb_lags = 24);

}  // namespace sdfm
