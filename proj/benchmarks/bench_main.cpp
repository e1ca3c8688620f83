#include "gresfa/batteries.hpp"
#include "gresfa/estimation.hpp"
#include "gresfa/simulation.hpp"

#include <benchmark/benchmark.h>

using namespace gresfa;

namespace {

const SimulatedSample& study2_sample() {
  static const SimulatedSample sample = [] {
    RandomStream rng(1);
    return generate_study2({.n = 500}, rng);
  }();
  return sample;
}

const FitResult& study2_fit() {
  static const FitResult fit = [] {
    OptimOptions opts;
    opts.compute_information = false;
    return fit_ml(study2_sample().data, study2_spec(), opts);
  }();
  return fit;
}

void BM_MarginalLogDensity(benchmark::State& state) {
  const FactorModel model(study1_params());
  RandomStream rng(2);
  const Vector y = rng.normal_vector(20);
  for (auto _ : state) benchmark::DoNotOptimize(model.marginal_log_density(y));
}
BENCHMARK(BM_MarginalLogDensity);

void BM_ScoreMatrix(benchmark::State& state) {
  const ParamLayout layout(study2_spec());
  const FactorModel model(study2_params(false));
  const Matrix& obs = study2_sample().data.values;
  for (auto _ : state) benchmark::DoNotOptimize(score_matrix(layout, model, obs));
  state.SetItemsProcessed(state.iterations() * obs.rows());
}
BENCHMARK(BM_ScoreMatrix);

void BM_FitOneFactor(benchmark::State& state) {
  OptimOptions opts;
  opts.compute_information = false;
  for (auto _ : state) benchmark::DoNotOptimize(fit_ml(study2_sample().data, study2_spec(), opts));
}
BENCHMARK(BM_FitOneFactor)->Unit(benchmark::kMillisecond);

void BM_BatteryMatrix(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  const LvGrid grid = default_grid(d);
  const ParamSet params = d == 1 ? study2_params(false) : study1_params();
  const FactorModel model(params);
  RandomStream rng(3);
  const Matrix draws = simulate_observations(params, 1000, rng);
  const LvDensityBattery battery(grid.points);
  for (auto _ : state) benchmark::DoNotOptimize(battery_matrix(battery, model, draws));
  state.SetItemsProcessed(state.iterations() * 1000);
}
BENCHMARK(BM_BatteryMatrix)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

void BM_ResidualTest(benchmark::State& state) {
  McConfig mc;
  mc.draws = static_cast<std::size_t>(state.range(0));
  const ResidualProblem problem = mv_linearity_problem(default_grid(1), 1, 10);
  for (auto _ : state) benchmark::DoNotOptimize(run_residual_test(problem, study2_fit(), study2_sample().data, mc));
}
BENCHMARK(BM_ResidualTest)->Arg(4000)->Arg(10000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
