#include <benchmark/benchmark.h>

#include "poissonlab/ci_model.hpp"
#include "poissonlab/d_statistic.hpp"

namespace {

using namespace poissonlab;

DStatisticModel desk_model() {
  const JointDistribution null = generate_null(4, 4, 50, 1);
  return build_d_model(perturb(null, 0.5, 2).joint, 1000.0);
}

void BM_SampleD(benchmark::State& state) {
  const DStatisticModel model = desk_model();
  std::uint64_t seed = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(sample_d(model, ++seed));
  }
}
BENCHMARK(BM_SampleD);

void BM_ExactMoments(benchmark::State& state) {
  const DStatisticModel model = desk_model();
  for (auto _ : state) {
    benchmark::DoNotOptimize(exact_moments(model));
  }
}
BENCHMARK(BM_ExactMoments)->Unit(benchmark::kMicrosecond);

}  // namespace
