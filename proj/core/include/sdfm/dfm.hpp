#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <utility>
#include <vector>

#include "sdfm/panel.hpp"
#include "sdfm/sgcv.hpp"

namespace sdfm {

// Factor counts and the SGCV configuration used for the nonstationary PCA.
// r1: nonstationary nonseasonal, r2: nonstationary seasonal, r3: stationary.
struct FactorSpec {
  int r1 = 0;
  int r2 = 2;
  int r3 = 0;
  int h = 12;
  int d = 1;
  int S = 12;

  int r_ns() const { return r1 + r2; }
  int r() const { return r1 + r2 + r3; }

  // n is the panel cross-section size. Enforces r >= 1, r <= n, and that h
  // is a positive multiple of S whenever seasonal factors are requested.
  void validate(int n) const;
};

struct DfmFit {
  Eigen::MatrixXd loadings;   // n x r, blocks [nonstationary | stationary]
  Eigen::MatrixXd factors;    // r x T
  Eigen::MatrixXd common;     // n x T
  Eigen::MatrixXd residuals;  // n x T; common + residuals = panel exactly
  FactorSpec spec;
  std::vector<double> explained;   // nested share captured by first i factors
  Eigen::VectorXd eigenvalues_ns;  // SGCV eigenvalues behind the ns loadings
  Eigen::VectorXd eigenvalues_st;  // residual-covariance eigenvalues (r3 > 0)
};

// Resolves eigenvector sign indeterminacy: each column is flipped so its sum
// is nonnegative; a column whose sum is within 1e-12 of zero instead gets its
// largest-magnitude entry made positive.
Eigen::MatrixXd apply_sign_convention(Eigen::MatrixXd vectors);

// Loadings = top-(r1+r2) orthonormal eigenvectors of the symmetrized C(h);
// factors = loadings' * x_t.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> estimate_nonstationary(
    const Panel& panel, const FactorSpec& spec);

// PCA on the residual sample covariance (rows centered by their own means);
// factors are loadings' * centered residuals.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> estimate_stationary(
    const Eigen::MatrixXd& residuals, int r3);

DfmFit fit(const Panel& panel, const FactorSpec& spec);

// Re-runs the lag-sweep eigen diagnostic on the fit residuals, as a check of
// how much seasonal structure the kept factors left behind.
EigenSequence refit_residual_diagnostic(const DfmFit& fit, int H, int k,
                                        EigenMode mode = EigenMode::Symmetrize);

// Writes loadings.csv, factors.csv, common.csv, residuals.csv, fit.json into
// dir. `panel` provides station ids and the date axis.
void save_fit(const DfmFit& fit, const Panel& panel,
              const std::filesystem::path& dir);

}  // namespace sdfm
