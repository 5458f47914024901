#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "sdfm/panel.hpp"

namespace sdfm {

// Knobs of the sequential imputation scheme. Defaults are the constants the
// source data pins down: monthly season, five-year window, regime boundary
// at t = 25.
struct ImputeConfig {
  int backward_cutoff = 25;
  int horizon = 5;
  int season = 12;
};

// Floor division (rounds toward minus infinity, unlike integer /).
constexpr int floor_div(int a, int b) {
  const int q = a / b;
  return (a % b != 0 && ((a % b < 0) != (b < 0))) ? q - 1 : q;
}

// Y_t^(1) = min{horizon, floor((t-1)/season)}.
constexpr int count_y1(int t, const ImputeConfig& cfg = {}) {
  return std::min(cfg.horizon, floor_div(t - 1, cfg.season));
}

// Y_t^(2) = min{horizon, floor((t-2)/season)}.
constexpr int count_y2(int t, const ImputeConfig& cfg = {}) {
  return std::min(cfg.horizon, floor_div(t - 2, cfg.season));
}

enum class ImputeMethod { Forward, Backward };

const char* to_string(ImputeMethod method);

// One imputation estimate: the same-month average x_hat_1, the previous-value
// plus mean-difference estimate x_hat_2, and the term counts that entered
// each average.
struct ImputeEstimate {
  double x_hat_1 = 0.0;
  double x_hat_2 = 0.0;
  int count_1 = 0;
  int count_2 = 0;
  double imputed() const { return 0.5 * (x_hat_1 + x_hat_2); }
};

using BoolVec = Eigen::Array<bool, Eigen::Dynamic, 1>;

// Past-years estimator for t > backward_cutoff. `missing` is the CURRENT
// mask: values imputed earlier in the sequential pass count as observed.
// All referenced past values must be present, otherwise the caller broke
// chronological order.
ImputeEstimate estimate_forward(const Eigen::VectorXd& x, const BoolVec& missing,
                                int t, const ImputeConfig& cfg = {});

// Following-years estimator for 2 <= t <= backward_cutoff. Future terms are
// screened against the ORIGINAL mask (the x*/d* zeroing rule); indices past
// the end of the series count as missing. x_{t-1} is read from the current
// state, so an earlier imputed value qualifies.
ImputeEstimate estimate_backward(const Eigen::VectorXd& x,
                                 const BoolVec& missing_now,
                                 const BoolVec& missing_original, int t,
                                 const ImputeConfig& cfg = {});

struct ImputationEntry {
  std::string station_id;
  int t = 0;
  int year = 0;
  int month = 0;
  ImputeMethod method = ImputeMethod::Forward;
  double x_hat_1 = 0.0;
  double x_hat_2 = 0.0;
  double imputed = 0.0;
  int count_1 = 0;
  int count_2 = 0;
};

struct ImputationReport {
  std::vector<ImputationEntry> entries;
};

// Fills every missing cell. Series are processed independently; within a
// series, holes are handled in increasing t so an imputed value can feed
// later estimates. Requires x_1 observed in every series.
std::pair<Panel, ImputationReport> impute_panel(const Panel& panel,
                                                const ImputeConfig& cfg = {});

// CSV columns: station,t,year,month,method,x_hat_1,x_hat_2,imputed,count_1,count_2
void write_report_csv(const ImputationReport& report,
                      const std::filesystem::path& path);

void write_report_json(const ImputationReport& report,
                       const std::filesystem::path& path);

}  // namespace sdfm
