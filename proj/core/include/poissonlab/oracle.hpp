#pragma once

// Cross-checks of the series engine against two independent routes: the
// pairwise variance form and plain Monte Carlo.

#include <cstdint>
#include <vector>

#include "poissonlab/inequality_lab.hpp"
#include "poissonlab/poisson_core.hpp"

namespace poissonlab {

/// Twenty (lambda, a, b) points with lambda log-spaced over [0.01, 1e4].
std::vector<GridPoint> pinned_oracle_points();

struct OracleRow {
  GridPoint point;
  double mean = 0.0;
  double mean_error = 0.0;
  double variance = 0.0;
  double variance_error = 0.0;
  double pairwise = 0.0;
  double pairwise_error = 0.0;
  double mc_mean = 0.0;
  double mc_variance = 0.0;
  // Standard errors of the two estimators under the exact distribution.
  double se_mean = 0.0;
  double se_variance = 0.0;
  std::int64_t draws = 0;
  bool pairwise_agrees = false;
  bool mc_mean_agrees = false;
  bool mc_variance_agrees = false;

  [[nodiscard]] bool passed() const noexcept {
    return pairwise_agrees && mc_mean_agrees && mc_variance_agrees;
  }
};

/// Fourth central moment of f(X), summed directly over the bulk of the pmf.
/// Only used to size standard errors, so no error bound is attached.
double central_fourth_moment(const CappedFunctional& f, double mean);

/// Draws are seeded from derive_seed(seed, {draw}); the result does not
/// depend on the thread count.
OracleRow oracle_check(const GridPoint& point, std::int64_t draws, std::uint64_t seed,
                       double k = 4.0, double tol = kDefaultTolerance, unsigned threads = 1);

}  // namespace poissonlab
