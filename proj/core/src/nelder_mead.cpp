#include "sdfm/nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "sdfm/errors.hpp"

namespace sdfm {

NelderMeadResult nelder_mead(
    const std::function<double(const Eigen::VectorXd&)>& objective,
    const Eigen::VectorXd& start, const NelderMeadOptions& options) {
  const int dim = static_cast<int>(start.size());
  if (dim < 1) throw SpecError("nelder_mead requires at least one dimension");

  const double f0 = objective(start);
  if (!std::isfinite(f0)) {
    throw FitError("nelder_mead starting point is infeasible");
  }

  std::vector<Eigen::VectorXd> verts(static_cast<std::size_t>(dim) + 1, start);
  std::vector<double> fvals(static_cast<std::size_t>(dim) + 1, f0);
  for (int i = 0; i < dim; ++i) {
    verts[static_cast<std::size_t>(i) + 1](i) += options.init_step;
    fvals[static_cast<std::size_t>(i) + 1] = objective(verts[static_cast<std::size_t>(i) + 1]);
  }

  std::vector<std::size_t> order(verts.size());
  std::iota(order.begin(), order.end(), 0);
  const auto sort_order = [&] {
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return fvals[a] < fvals[b]; });
  };

  NelderMeadResult result;
  int iter = 0;
  bool converged = false;
  for (; iter < options.max_iter; ++iter) {
    sort_order();
    const std::size_t best = order.front();
    const std::size_t worst = order.back();
    const std::size_t second_worst = order[order.size() - 2];

    // Convergence: vertex spread around the best point and function spread.
    double diameter = 0.0;
    for (std::size_t i = 0; i < verts.size(); ++i) {
      if (i == best) continue;
      diameter = std::max(diameter, (verts[i] - verts[best]).norm());
    }
    const double f_best = fvals[best];
    const double f_worst = fvals[worst];
    const double f_spread = std::isfinite(f_worst)
                                ? std::abs(f_worst - f_best)
                                : std::numeric_limits<double>::infinity();
    if (diameter < options.diameter_tol &&
        f_spread <= options.f_rel_tol * (std::abs(f_best) + 1e-30)) {
      converged = true;
      break;
    }

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(dim);
    for (std::size_t i = 0; i < verts.size(); ++i) {
      if (i != worst) centroid += verts[i];
    }
    centroid /= dim;

    const Eigen::VectorXd reflected =
        centroid + options.reflection * (centroid - verts[worst]);
    const double f_reflected = objective(reflected);

    if (f_reflected < fvals[best]) {
      const Eigen::VectorXd expanded =
          centroid + options.expansion * (reflected - centroid);
      const double f_expanded = objective(expanded);
      if (f_expanded < f_reflected) {
        verts[worst] = expanded;
        fvals[worst] = f_expanded;
      } else {
        verts[worst] = reflected;
        fvals[worst] = f_reflected;
      }
      continue;
    }
    if (f_reflected < fvals[second_worst]) {
      verts[worst] = reflected;
      fvals[worst] = f_reflected;
      continue;
    }

    Eigen::VectorXd contracted;
    double f_contracted;
    if (f_reflected < fvals[worst]) {
      contracted = centroid + options.contraction * (reflected - centroid);
      f_contracted = objective(contracted);
      if (f_contracted <= f_reflected) {
        verts[worst] = contracted;
        fvals[worst] = f_contracted;
        continue;
      }
    } else {
      contracted = centroid - options.contraction * (centroid - verts[worst]);
      f_contracted = objective(contracted);
      if (f_contracted < fvals[worst]) {
        verts[worst] = contracted;
        fvals[worst] = f_contracted;
        continue;
      }
    }

    for (std::size_t i = 0; i < verts.size(); ++i) {
      if (i == best) continue;
      verts[i] = verts[best] + options.shrink * (verts[i] - verts[best]);
      fvals[i] = objective(verts[i]);
    }
  }

  sort_order();
  result.x = verts[order.front()];
  result.fx = fvals[order.front()];
  result.iterations = iter;
  result.converged = converged;
  return result;
}

}  // namespace sdfm
