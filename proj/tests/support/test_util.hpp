#pragma once

#include <unistd.h>

#include <Eigen/Dense>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include "sdfm/panel.hpp"
#include "sdfm/rng.hpp"
#include "sdfm/simulate.hpp"
#include "sdfm/time_index.hpp"

namespace sdfm_test {

// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    const int id = counter.fetch_add(1);
    path_ = std::filesystem::temp_directory_path() /
            ("sdfm_test_" + std::to_string(::getpid()) + "_" + std::to_string(id));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& leaf) const { return path_ / leaf; }

 private:
  std::filesystem::path path_;
};

inline sdfm::Panel make_panel(const Eigen::MatrixXd& values, int start_year = 2008,
                              int start_month = 1) {
  sdfm::Panel panel;
  panel.values = values;
  panel.missing = values.array().isNaN();
  panel.time = sdfm::TimeIndex{start_year, start_month,
                               static_cast<int>(values.cols())};
  for (int i = 0; i < values.rows(); ++i) {
    sdfm::StationMeta meta;
    meta.id = "s" + std::to_string(i + 1);
    panel.stations.push_back(meta);
  }
  panel.validate();
  return panel;
}

inline sdfm::Panel make_panel(const Eigen::MatrixXd& values,
                              const sdfm::MissingMask& missing, int start_year = 2008,
                              int start_month = 1) {
  Eigen::MatrixXd holed = values;
  for (int i = 0; i < values.rows(); ++i)
    for (int t = 0; t < values.cols(); ++t)
      if (missing(i, t)) holed(i, t) = std::numeric_limits<double>::quiet_NaN();
  sdfm::Panel panel = make_panel(holed, start_year, start_month);
  panel.missing = missing;
  panel.validate();
  return panel;
}

inline Eigen::MatrixXd random_matrix(int rows, int cols, std::uint64_t seed) {
  sdfm::Rng rng(seed);
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = rng.normal();
  return m;
}

// Seasonal-looking test series: per-station monthly pattern plus a trend and
// noise. Keeps imputation tests on data that resembles the intended input.
inline Eigen::MatrixXd seasonal_matrix(int rows, int cols, std::uint64_t seed) {
  sdfm::Rng rng(seed);
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    const double amp = 3.0 + 2.0 * rng.uniform();
    const double phase = rng.uniform(0.0, 6.283185307179586);
    const double drift = rng.uniform(-0.02, 0.02);
    for (int t = 0; t < cols; ++t)
      m(i, t) = amp * std::cos(0.5235987755982988 * t + phase) + drift * t +
                0.5 * rng.normal();
  }
  return m;
}

// Bitwise matrix equality; NaN cells count as equal when both sides are NaN.
inline bool same_values(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) {
      const bool na = std::isnan(a(i, j)), nb = std::isnan(b(i, j));
      if (na != nb) return false;
      if (!na && a(i, j) != b(i, j)) return false;
    }
  return true;
}

// Workhorse DGP for the seasonal-factor tests: two airline-law seasonal
// factors whose initial monthly patterns are phase-shifted harmonics. The two
// patterns are orthogonal over a year and have equal energy, so neither factor
// degenerates and the pair spans a clean two-dimensional seasonal space.
inline sdfm::SimScenario quadrature_scenario(int n, int T, std::uint64_t seed,
                                             double missing_rate = 0.0,
                                             double amp = 14.0) {
  sdfm::SimScenario sc;
  sc.n = n;
  sc.T = T;
  sc.seed = seed;
  sc.missing_rate = missing_rate;
  sc.idio_sd = Eigen::VectorXd::Constant(1, 0.3);
  const double w = std::pow(3.0, 0.25);
  const double two_pi = 6.283185307179586;
  for (int which = 0; which < 2; ++which) {
    sdfm::FactorProcess fp;
    fp.spec = sdfm::SarimaSpec{0, 0, 0, 0, 1, 1, 12};
    fp.params.sma = {-0.5};
    fp.params.sigma2 = 1.0;
    fp.seasonal_init.resize(12);
    for (int m = 0; m < 12; ++m) {
      const double a1 = two_pi * m / 12.0;
      const double a2 = two_pi * 2.0 * m / 12.0;
      fp.seasonal_init[m] = which == 0 ? amp * (std::cos(a1) + w * std::cos(a2))
                                       : amp * (std::sin(a1) + w * std::sin(a2));
    }
    sc.seasonal.push_back(fp);
  }
  return sc;
}

}  // namespace sdfm_test
