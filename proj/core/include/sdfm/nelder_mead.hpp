#pragma once

#include <Eigen/Dense>
#include <functional>

namespace sdfm {

struct NelderMeadOptions {
  int max_iter = 5000;
  double reflection = 1.0;
  double expansion = 2.0;
  double contraction = 0.5;
  double shrink = 0.5;
  double init_step = 0.1;      // offset of the initial simplex vertices
  double diameter_tol = 1e-8;  // max vertex distance from the best point
  double f_rel_tol = 1e-10;    // relative spread of function values
};

struct NelderMeadResult {
  Eigen::VectorXd x;
  double fx = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Derivative-free simplex minimizer. The objective may return +infinity to
// reject infeasible points (barrier constraints); the initial point must be
// feasible. converged means both the simplex diameter and the relative
// function spread fell below their tolerances.
NelderMeadResult nelder_mead(
    const std::function<double(const Eigen::VectorXd&)>& objective,
    const Eigen::VectorXd& start, const NelderMeadOptions& options = {});

}  // namespace sdfm
