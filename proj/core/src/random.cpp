#include "poissonlab/random.hpp"

#include <cmath>
#include <stdexcept>

#include "poissonlab/poisson_core.hpp"

namespace poissonlab {

namespace {

constexpr double kInversionLimit = 30.0;

std::int64_t sample_inversion(double lambda, SplitMix64& rng) {
  const double u = rng.uniform();
  double p = std::exp(-lambda);
  double cdf = p;
  std::int64_t k = 0;
  while (u > cdf) {
    ++k;
    p *= lambda / static_cast<double>(k);
    cdf += p;
    if (p == 0.0) {
      // cdf stalled just short of 1 through rounding.
      break;
    }
  }
  return k;
}

std::int64_t sample_ptrs(double lambda, SplitMix64& rng) {
  const double slam = std::sqrt(lambda);
  const double loglam = std::log(lambda);
  const double b = 0.931 + 2.53 * slam;
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double vr = 0.9277 - 3.6224 / (b - 2.0);

  for (;;) {
    const double u = rng.uniform() - 0.5;
    const double v = rng.uniform();
    const double us = 0.5 - std::abs(u);
    const auto k = static_cast<std::int64_t>(std::floor((2.0 * a / us + b) * u + lambda + 0.43));
    if (us >= 0.07 && v <= vr) {
      return k;
    }
    if (k < 0 || (us < 0.013 && v > us)) {
      continue;
    }
    const double lhs = std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b);
    const double rhs = -lambda + static_cast<double>(k) * loglam - detail::log_factorial(k);
    if (lhs <= rhs) {
      return k;
    }
  }
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t root, std::initializer_list<std::uint64_t> path) noexcept {
  std::uint64_t state = SplitMix64::mix(root ^ 0x6A09E667F3BCC909ULL);
  for (const std::uint64_t step : path) {
    state = SplitMix64::mix(state + 0x9E3779B97F4A7C15ULL * (step + 1));
  }
  return state;
}

std::int64_t sample_poisson(double lambda, SplitMix64& rng) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw std::domain_error("sample_poisson: lambda must be finite and nonnegative");
  }
  if (lambda == 0.0) {
    return 0;
  }
  return lambda < kInversionLimit ? sample_inversion(lambda, rng) : sample_ptrs(lambda, rng);
}

}  // namespace poissonlab
