#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "sdfm/panel.hpp"
#include "sdfm/sarima.hpp"

namespace sdfm {

// One latent factor law. seasonal_init is only meaningful for the
// nonstationary seasonal block: a fixed S-periodic component added after
// integration (equivalently, a choice of integration initial conditions;
// (1-B^S)^D annihilates it, so the declared law still holds). Empty means
// zero initial pattern. Entry i applies at times t with (t-1) mod S == i.
struct FactorProcess {
  SarimaSpec spec;
  SarimaParams params;
  std::vector<double> seasonal_init;
};

enum class LoadingStyle { Orthonormal, GaussianRaw };

// Full data-generating process for a synthetic panel: three factor blocks
// (nonseasonal nonstationary, seasonal nonstationary, stationary), loading
// draw style, per-series or scalar idiosyncratic noise, and uniform missing
// holes that never touch t = 1.
struct SimScenario {
  int n = 0;
  int T = 0;
  int start_year = 2008;
  int start_month = 1;
  std::vector<FactorProcess> nonseasonal;  // d >= 1, D = 0
  std::vector<FactorProcess> seasonal;     // D >= 1, d = 0
  std::vector<FactorProcess> stationary;   // d = D = 0
  LoadingStyle loading_style = LoadingStyle::Orthonormal;
  Eigen::VectorXd idio_sd;  // length 1 (scalar) or length n
  double missing_rate = 0.0;
  std::uint64_t seed = 0;
  int burn_in = 120;

  int r1() const { return static_cast<int>(nonseasonal.size()); }
  int r2() const { return static_cast<int>(seasonal.size()); }
  int r3() const { return static_cast<int>(stationary.size()); }
  int r() const { return r1() + r2() + r3(); }

  void validate() const;
};

struct SimOutput {
  Panel panel;       // with holes when missing_rate > 0
  Panel full_panel;  // no holes; equals true_common + idiosyncratic draws
  Eigen::MatrixXd true_loadings;  // n x r
  Eigen::MatrixXd true_factors;   // r x T
  Eigen::MatrixXd true_common;    // n x T
};

SimOutput gen_scenario(const SimScenario& scenario);

// Largest principal angle (degrees) between the column spans of two
// orthonormal n x k matrices, via singular values of A'B.
double principal_angle(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

SimScenario load_scenario(const std::filesystem::path& path);
SimScenario parse_scenario(const std::string& json_text);
std::string scenario_to_json(const SimScenario& scenario);

// Writes panel.csv, full_panel.csv (when holes exist), and truth/ with
// loadings.csv, factors.csv, common.csv.
void save_sim_output(const SimOutput& out, const std::filesystem::path& dir);

}  // namespace sdfm
