#pragma once

// Poisson pmf evaluation and truncation-certified moments of the capped
// functional
//
//     f(x) = x * sqrt(min(x, a) * min(x, b)) * 1(x >= t),   X ~ Poisson(lambda).
//
// Every moment comes back with two error bars: a rigorous bound on the mass of
// the discarded series tail, and a bound on floating-point rounding.

#include <cstdint>
#include <stdexcept>
#include <string>

namespace poissonlab {

inline constexpr double kDefaultTolerance = 1e-10;
inline constexpr std::int64_t kMaxTerms = 10'000'000;
inline constexpr int kDefaultThreshold = 4;

/// Upper bound on the relative error of pmf() wherever the true probability is
/// at least kPmfReliableFloor. Below the floor the error grows with |log p|, so
/// the summation engines charge such terms their full magnitude instead.
/// Checked against a 50-digit reference in the unit tests.
inline constexpr double kPmfRelativeError = 1e-13;
inline constexpr double kPmfReliableFloor = 1e-60;

/// Parameters of the capped functional. Caps are stored with cap_a <= cap_b;
/// the functional is symmetric in the two caps. Caps may be +infinity.
class CappedFunctional {
 public:
  CappedFunctional(double lambda, double cap_a, double cap_b,
                   int threshold = kDefaultThreshold);

  [[nodiscard]] double lambda() const noexcept { return lambda_; }
  [[nodiscard]] double cap_a() const noexcept { return cap_a_; }
  [[nodiscard]] double cap_b() const noexcept { return cap_b_; }
  [[nodiscard]] int threshold() const noexcept { return threshold_; }

  [[nodiscard]] double operator()(std::int64_t x) const noexcept;

 private:
  double lambda_;
  double cap_a_;
  double cap_b_;
  int threshold_;
};

struct MomentEstimate {
  double value = 0.0;
  /// Certified bound on the truncated tail of the series.
  double tail_bound = 0.0;
  /// Bound on accumulated floating-point error (pmf evaluation and summation).
  double rounding_bound = 0.0;
  /// One past the last summation index.
  std::int64_t terms_used = 0;
  /// Set when E[f^2] - E[f]^2 lost too many digits and the centered
  /// two-pass form was used instead.
  bool cancellation_fallback = false;

  [[nodiscard]] double error_bound() const noexcept { return tail_bound + rounding_bound; }
};

struct PairwiseVarianceResult {
  double value = 0.0;
  double tail_bound = 0.0;
  double rounding_bound = 0.0;
  std::int64_t window_lo = 0;
  std::int64_t window_hi = 0;

  [[nodiscard]] double error_bound() const noexcept { return tail_bound + rounding_bound; }
};

struct CappedMoments {
  MomentEstimate mean;
  MomentEstimate variance;
};

/// Thrown when the requested tolerance cannot be certified within the term
/// budget. Carries the best bound reached.
class TruncationError : public std::runtime_error {
 public:
  TruncationError(const std::string& what, double best_bound, std::int64_t terms)
      : std::runtime_error(what), best_bound_(best_bound), terms_(terms) {}

  [[nodiscard]] double best_bound() const noexcept { return best_bound_; }
  [[nodiscard]] std::int64_t terms_used() const noexcept { return terms_; }

 private:
  double best_bound_;
  std::int64_t terms_;
};

/// ln P(X = x) through the log-gamma function. lambda == 0 is the point mass
/// at zero (returns -infinity for x > 0).
double log_pmf(double lambda, std::int64_t x);

/// P(X = x) in saddle-point form (Loader's deviance formulation), accurate to
/// a few ulps relative even far in the tails.
double pmf(double lambda, std::int64_t x);

double functional_value(std::int64_t x, const CappedFunctional& f) noexcept;

/// E[f(X)] and Var[f(X)] from a single certified pass.
CappedMoments moments(const CappedFunctional& f, double tol = kDefaultTolerance);

MomentEstimate expectation(const CappedFunctional& f, double tol = kDefaultTolerance);
MomentEstimate variance(const CappedFunctional& f, double tol = kDefaultTolerance);

/// Var[f(X)] through 1/2 E[(f(X) - f(X'))^2] with X' an independent copy.
/// O(window^2); intended as an oracle for variance().
PairwiseVarianceResult variance_pairwise(const CappedFunctional& f,
                                         double tol = kDefaultTolerance);

/// E[X 1(X >= 4)] and Var[X 1(X >= 4)].
CappedMoments plain_indicator_moments(double lambda, double tol = kDefaultTolerance);

namespace detail {

/// ln(n!) - [(n + 1/2) ln n - n + ln sqrt(2 pi)] for n >= 1.
double stirling_error(std::int64_t n) noexcept;

/// x ln(x / mean) + mean - x, evaluated without cancellation near x == mean.
double deviance(double x, double mean) noexcept;

/// ln P(X = x) in saddle-point form; the engine uses it for tail bounds.
double log_pmf_saddle(double lambda, std::int64_t x) noexcept;

double log_factorial(std::int64_t n) noexcept;

/// Centered two-pass variance over [0, last]; the cancellation fallback.
MomentEstimate centered_variance(const CappedFunctional& f, std::int64_t last,
                                 double mean);

}  // namespace detail

}  // namespace poissonlab
