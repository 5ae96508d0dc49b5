// Microbenchmarks for the hot paths: one evaluation (a Cholesky plus the
// gradient), one Frank-Wolfe run, one barrier solve, and rounding.

#include <cmath>

#include <benchmark/benchmark.h>

#include "bitalloc/barrier.hpp"
#include "bitalloc/frank_wolfe.hpp"
#include "bitalloc/instances.hpp"
#include "bitalloc/rounding.hpp"

namespace {

bitalloc::ProblemInstance grid(Eigen::Index d) {
  bitalloc::InstanceSpec spec;
  spec.d = spec.m = d;
  spec.seed = 7;
  return bitalloc::generate(spec);
}

bitalloc::ProblemInstance gaussian(Eigen::Index d, Eigen::Index m) {
  bitalloc::InstanceSpec spec;
  spec.kind = bitalloc::InstanceKind::kRandomGaussian;
  spec.d = d;
  spec.m = m;
  spec.seed = 7;
  return bitalloc::generate(spec);
}

void BM_EvaluateGrid(benchmark::State& state) {
  const auto instance = grid(state.range(0));
  const Eigen::VectorXd b = Eigen::VectorXd::Constant(instance.num_sensors(), 2.0);
  for (auto _ : state) benchmark::DoNotOptimize(bitalloc::evaluate(instance, b).objective);
}
BENCHMARK(BM_EvaluateGrid)->Arg(13)->Arg(29)->Arg(56)->Arg(118);

// Sensor-rich evaluation: cost should grow about linearly in m at fixed d.
void BM_EvaluateSensorRich(benchmark::State& state) {
  const auto instance = gaussian(10, state.range(0));
  const Eigen::VectorXd b = Eigen::VectorXd::Constant(instance.num_sensors(), 2.0);
  for (auto _ : state) benchmark::DoNotOptimize(bitalloc::evaluate(instance, b).objective);
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_EvaluateSensorRich)->Arg(50)->Arg(500)->Arg(5000)->Complexity(benchmark::oN);

void BM_FrankWolfe(benchmark::State& state) {
  const auto instance = grid(state.range(0));
  bitalloc::FwConfig config;
  config.step_rule = bitalloc::StepRule::kAdaptiveLipschitz;
  config.max_iterations = 200;
  config.gap_tolerance = 0.0;
  const auto start = bitalloc::BitVector::continuous(Eigen::VectorXd::Constant(
      instance.num_sensors(), instance.budget() / static_cast<double>(instance.num_sensors())));
  for (auto _ : state) benchmark::DoNotOptimize(bitalloc::solve_fw(instance, config, start));
}
BENCHMARK(BM_FrankWolfe)->Arg(13)->Arg(56)->Unit(benchmark::kMillisecond);

void BM_Barrier(benchmark::State& state) {
  const auto instance = grid(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(bitalloc::solve_barrier(instance));
}
BENCHMARK(BM_Barrier)->Arg(13)->Arg(29)->Arg(56)->Unit(benchmark::kMillisecond);

void BM_Rounding(benchmark::State& state) {
  const Eigen::Index m = state.range(0);
  Eigen::VectorXd b = (Eigen::VectorXd::Random(m).array() + 1.0) * 2.0;
  const double budget = std::ceil(b.sum());
  b *= budget / b.sum();
  const auto bits = bitalloc::BitVector::continuous(b);
  for (auto _ : state) benchmark::DoNotOptimize(bitalloc::round_largest_remainder(bits, budget));
}
BENCHMARK(BM_Rounding)->Arg(13)->Arg(1000)->Arg(100000);

}  // namespace

BENCHMARK_MAIN();
