#pragma once

// Moments of the Poissonized statistic
//
//     D = Σ_z σ_z sqrt(min(σ_z, l1) min(σ_z, l2)) w_z 1(σ_z >= 4),
//
// exactly (per-slice certified moments, summed using independence of the
// σ_z) and by seeded Monte Carlo.

#include <cstdint>
#include <optional>
#include <vector>

#include "poissonlab/ci_model.hpp"
#include "poissonlab/poisson_core.hpp"

namespace poissonlab {

struct SliceMoments {
  int z = 0;
  double rate = 0.0;
  double weight = 0.0;
  /// Unweighted E and Var of σ_z ω_z 1(σ_z >= 4).
  double raw_mean = 0.0;
  double raw_variance = 0.0;
  /// weight * raw_mean and weight^2 * raw_variance.
  double mean = 0.0;
  double variance = 0.0;
};

struct DMoments {
  double mean = 0.0;
  double variance = 0.0;
  /// Certified error bound covering both totals (truncation and rounding).
  double tail_bound = 0.0;
  std::vector<SliceMoments> per_z;
};

struct MCResult {
  std::int64_t replications = 0;
  double mean_hat = 0.0;
  double var_hat = 0.0;
  double se_mean = 0.0;
  double se_var = 0.0;
  std::uint64_t seed = 0;
};

/// Slices with zero weight or zero rate contribute exactly zero. Slices may be
/// evaluated in parallel; totals are reduced in z order.
DMoments exact_moments(const DStatisticModel& model, double tol = kDefaultTolerance,
                       unsigned threads = 1);

/// One draw of D. σ_z comes from the stream derive_seed(seed, {z}).
double sample_d(const DStatisticModel& model, std::uint64_t seed);

/// Replication r uses sample_d(model, derive_seed(seed, {r})). The variance
/// standard error uses the sample fourth central moment.
MCResult mc_moments(const DStatisticModel& model, std::int64_t replications, std::uint64_t seed,
                    unsigned threads = 1);

/// Var[D] / E[D]; std::nullopt when E[D] is below kDenominatorFloor.
std::optional<double> lemma2_ratio(const DStatisticModel& model, double tol = kDefaultTolerance);
std::optional<double> lemma2_ratio(const DMoments& moments);

/// The variance bound for D as a chain of numeric inequalities:
///
///   Σ w^2 Var_z <= C1 Σ w^2 l1 l2 E_z <= (C1 / 4) Σ w E_z
///
/// with C1 the observed max over slices of Var_z / (l1 l2 E_z). The second
/// step uses w <= 1 / (4 l1 l2) and is checked with the exact constant 1/4.
struct ProofChainCheck {
  double variance = 0.0;        // Σ w^2 Var_z
  double scaled_mean = 0.0;     // Σ w^2 l1 l2 E_z
  double mean = 0.0;            // Σ w E_z
  double observed_c1 = 0.0;
  double slice_ratio_bound = 0.0;  // max over slices of w Var_z / E_z
  bool first_step = false;
  bool second_step = false;

  [[nodiscard]] bool holds() const noexcept { return first_step && second_step; }
};

ProofChainCheck proof_chain(const DStatisticModel& model, const DMoments& moments);

/// |mean_hat - mean| <= k se_mean and |var_hat - variance| <= k se_var.
bool mc_agrees(const MCResult& mc, const DMoments& exact, double k = 4.0);

}  // namespace poissonlab
