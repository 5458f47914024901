#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <vector>

#include "sdfm/panel.hpp"

namespace sdfm {

// Sample generalized autocovariance C(h) = (S/T)^{2d} sum_{t=h+1..T} x_t x_{t-h}'.
struct SgcvMatrix {
  int h = 0;
  int d = 1;
  int S = 12;
  Eigen::MatrixXd matrix;
};

SgcvMatrix sgcv(const Eigen::MatrixXd& values, int h, int d = 1, int S = 12);
SgcvMatrix sgcv(const Panel& panel, int h, int d = 1, int S = 12);

// (A + A')/2.
Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& a);

// Eigen pairs of a symmetric matrix ordered by |eigenvalue| descending;
// ties keep the solver's ascending-index order. Columns of `vectors` are
// orthonormal. `values` keeps the signed eigenvalues.
struct SymmetricEigen {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
};

SymmetricEigen eigen_symmetric(const Eigen::MatrixXd& matrix,
                               double symmetry_tol = 1e-10);

// C(h) with h > 0 is not symmetric. Symmetrize mode decomposes (A+A')/2 and
// yields the real orthonormal eigenvectors the estimator needs; General mode
// takes moduli of the possibly complex eigenvalues of A itself and exists for
// the magnitude diagnostic only.
enum class EigenMode { Symmetrize, General };

struct EigenSequence {
  std::vector<int> lags;                        // 0..H
  std::vector<std::vector<double>> magnitudes;  // per lag, top k, descending
  int k = 0;
};

EigenSequence eigen_sequence(const Eigen::MatrixXd& values, int H, int k,
                             int d = 1, int S = 12,
                             EigenMode mode = EigenMode::Symmetrize);
EigenSequence eigen_sequence(const Panel& panel, int H, int k, int d = 1,
                             int S = 12, EigenMode mode = EigenMode::Symmetrize);

// CSV columns: h,rank,magnitude (rank 1-based).
void write_eigens_csv(const EigenSequence& seq, const std::filesystem::path& path);

// Line chart with one polyline per rank.
void write_eigens_svg(const EigenSequence& seq, const std::filesystem::path& path);

}  // namespace sdfm
