#include <benchmark/benchmark.h>

#include "poissonlab/poisson_core.hpp"

namespace {

using poissonlab::CappedFunctional;

void BM_Pmf(benchmark::State& state) {
  const double lambda = static_cast<double>(state.range(0));
  std::int64_t x = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(poissonlab::pmf(lambda, x));
    x = (x + 1) % (2 * state.range(0) + 8);
  }
}
BENCHMARK(BM_Pmf)->Arg(1)->Arg(100)->Arg(100000);

void BM_Moments(benchmark::State& state) {
  const CappedFunctional f(static_cast<double>(state.range(0)), 4.0, 16.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(poissonlab::moments(f));
  }
}
BENCHMARK(BM_Moments)->RangeMultiplier(100)->Range(1, 1'000'000)->Unit(benchmark::kMicrosecond);

void BM_VariancePairwise(benchmark::State& state) {
  const CappedFunctional f(static_cast<double>(state.range(0)), 4.0, 16.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(poissonlab::variance_pairwise(f));
  }
}
BENCHMARK(BM_VariancePairwise)->Arg(1)->Arg(100)->Arg(10000)->Unit(benchmark::kMillisecond);

}  // namespace
