#include <benchmark/benchmark.h>

#include <random>

#include "vpd/vpd.hpp"

using namespace vpd;

namespace {

ScalarField random_vorticity(const GridSpec& g) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ScalarField z(g, FieldRole::vorticity);
  for (std::size_t k = 0; k < z.size(); ++k) z[k] = u(rng);
  return z;
}

void BM_GreenApply(benchmark::State& state, GreenStrategy strategy) {
  const int n = static_cast<int>(state.range(0));
  const GridSpec g = build_grid(1.0, n, n);
  const GreenOperator op(g, strategy);
  const ScalarField z = random_vorticity(g);
  for (auto _ : state) benchmark::DoNotOptimize(op.apply(z));
  state.SetComplexityN(static_cast<benchmark::IterationCount>(n) * n);
}

void BM_GreenSetup(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const GridSpec g = build_grid(1.0, n, n);
  for (auto _ : state) benchmark::DoNotOptimize(GreenOperator(g));
}

void BM_RelaxationStep(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Solver solver(make_config(0.05, 1.0, 1.0, Profile::heaviside(), n, n));
  const IterationState start = solver.initialize();
  for (auto _ : state) benchmark::DoNotOptimize(solver.relaxation_step(start));
}

void BM_SteinerSymmetrize(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const ScalarField z = random_vorticity(build_grid(1.0, n, n));
  for (auto _ : state) benchmark::DoNotOptimize(steiner_symmetrize(z));
}

}  // namespace

BENCHMARK_CAPTURE(BM_GreenApply, fft, GreenStrategy::fft)->RangeMultiplier(2)->Range(32, 256)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_GreenApply, direct, GreenStrategy::direct)->RangeMultiplier(2)->Range(16, 64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GreenSetup)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RelaxationStep)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SteinerSymmetrize)->Arg(256);
BENCHMARK_MAIN();
