#include <benchmark/benchmark.h>

#include "poissonlab/inequality_lab.hpp"

namespace {

using namespace poissonlab;

void BM_CorrectedSweep(benchmark::State& state) {
  const GridSpec grid = GridSpec::default_for(RatioKind::corrected);
  const auto threads = static_cast<unsigned>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(sweep(grid, RatioKind::corrected, threads));
  }
}
BENCHMARK(BM_CorrectedSweep)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();

void BM_HInfimum(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(h_infimum());
  }
}
BENCHMARK(BM_HInfimum)->Unit(benchmark::kMicrosecond);

void BM_Falsify(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(falsify_original_claim(50.0));
  }
}
BENCHMARK(BM_Falsify)->Unit(benchmark::kMillisecond);

}  // namespace
