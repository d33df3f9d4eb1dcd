#pragma once

#include <cstdint>
#include <initializer_list>
#include <limits>

namespace poissonlab {

/// SplitMix64 generator. Satisfies UniformRandomBitGenerator; cheap to seed,
/// so every (replication, slice) pair can own an independent stream.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept {
    state_ += 0x9E3779B97F4A7C15ULL;
    return mix(state_);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

/// Derives a child seed from a root seed and a path of counters, e.g.
/// derive_seed(root, {replication, slice}). Distinct paths give unrelated
/// streams; the result never depends on evaluation order.
std::uint64_t derive_seed(std::uint64_t root, std::initializer_list<std::uint64_t> path) noexcept;

/// Poisson variate: sequential-search inversion below lambda = 30, Hormann's
/// transformed rejection with squeeze (PTRS) above.
std::int64_t sample_poisson(double lambda, SplitMix64& rng);

}  // namespace poissonlab
