#include <benchmark/benchmark.h>

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>

#include "sdfm/dfm.hpp"
#include "sdfm/impute.hpp"
#include "sdfm/panel.hpp"
#include "sdfm/rng.hpp"
#include "sdfm/sarima.hpp"
#include "sdfm/sgcv.hpp"
#include "sdfm/simulate.hpp"

namespace {

using namespace sdfm;

SimScenario paper_scenario(int n, int T, double missing_rate) {
  SimScenario sc;
  sc.n = n;
  sc.T = T;
  sc.start_year = 2008;
  sc.start_month = 1;
  sc.seed = 20080101;
  sc.missing_rate = missing_rate;
  sc.idio_sd = Eigen::VectorXd::Constant(1, 0.3);
  for (int j = 0; j < 2; ++j) {
    FactorProcess f;
    f.spec = SarimaSpec{0, 0, 0, 0, 1, 1, 12};
    f.params.sma = {-0.5};
    f.params.sigma2 = 1.0;
    f.seasonal_init.resize(12);
    for (int m = 0; m < 12; ++m) {
      const double a = 2.0 * M_PI * m / 12.0;
      f.seasonal_init[m] =
          j == 0 ? 8.0 * (std::cos(a) + std::pow(3.0, 0.25) * std::cos(2 * a))
                 : 8.0 * (std::sin(a) + std::pow(3.0, 0.25) * std::sin(2 * a));
    }
    sc.seasonal.push_back(f);
  }
  return sc;
}

Panel clean_panel(int n, int T) {
  SimScenario sc = paper_scenario(n, T, 0.0);
  return gen_scenario(sc).panel;
}

void bm_sgcv(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Panel panel = standardize(clean_panel(n, 204)).first;
  for (auto _ : state) {
    benchmark::DoNotOptimize(sgcv(panel.values, 12).matrix);
  }
}
BENCHMARK(bm_sgcv)->Arg(42)->Arg(100);

void bm_eigen_sequence(benchmark::State& state) {
  const Panel panel = standardize(clean_panel(42, 204)).first;
  for (auto _ : state) {
    benchmark::DoNotOptimize(eigen_sequence(panel.values, 36, 5));
  }
}
BENCHMARK(bm_eigen_sequence);

void bm_impute_panel(benchmark::State& state) {
  SimScenario sc = paper_scenario(42, 204, 0.02);
  const Panel panel = gen_scenario(sc).panel;
  for (auto _ : state) {
    benchmark::DoNotOptimize(impute_panel(panel).first.values.sum());
  }
}
BENCHMARK(bm_impute_panel);

void bm_dfm_fit(benchmark::State& state) {
  const Panel panel = standardize(clean_panel(42, 204)).first;
  FactorSpec spec;
  spec.r3 = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(fit(panel, spec).common.sum());
  }
}
BENCHMARK(bm_dfm_fit);

void bm_css(benchmark::State& state) {
  const SarimaSpec spec{1, 0, 0, 0, 1, 1, 12};
  SarimaParams params;
  params.ar = {0.6};
  params.sma = {-0.5};
  const std::vector<double> x = simulate_sarima(spec, params, 2000, 11);
  for (auto _ : state) {
    benchmark::DoNotOptimize(css(x, spec, params).css);
  }
}
BENCHMARK(bm_css);

void bm_fit_sarima(benchmark::State& state) {
  const SarimaSpec spec{1, 0, 0, 0, 1, 1, 12};
  SarimaParams params;
  params.ar = {0.6};
  params.sma = {-0.5};
  const std::vector<double> x =
      simulate_sarima(spec, params, static_cast<int>(state.range(0)), 11);
  for (auto _ : state) {
    benchmark::DoNotOptimize(fit_sarima(x, spec).css);
  }
}
BENCHMARK(bm_fit_sarima)->Arg(204)->Arg(2000);

void bm_gen_scenario(benchmark::State& state) {
  SimScenario sc = paper_scenario(42, 204, 0.02);
  for (auto _ : state) {
    sc.seed += 1;  // avoid measuring a fully cached path
    benchmark::DoNotOptimize(gen_scenario(sc).panel.values.sum());
  }
}
BENCHMARK(bm_gen_scenario);

}  // namespace

BENCHMARK_MAIN();
