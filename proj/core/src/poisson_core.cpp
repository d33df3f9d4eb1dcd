#include "poissonlab/poisson_core.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "poissonlab/numeric.hpp"

namespace poissonlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLnSqrt2Pi = 0.918938533204672741780329736406;

// Truncation bounds are computed in floating point; inflate them slightly so
// the rounding in the bound itself cannot undercut the true tail.
constexpr double kBoundInflation = 1.0 + 1e-12;

// Cancellation guard for E[f^2] - E[f]^2.
constexpr double kCancellationMagnitude = 1e8;
constexpr double kCancellationDigits = 1e-12;

constexpr std::int64_t kMaxPairwiseWindow = 50'000;

void require_tolerance(double tol) {
  if (!(tol > 0.0) || !std::isfinite(tol)) {
    throw std::domain_error("tolerance must be positive and finite");
  }
}

double certify(double log_bound) noexcept {
  if (std::isnan(log_bound)) {
    return kInf;
  }
  const double b = std::exp(log_bound) * kBoundInflation;
  if (b == 0.0 && log_bound > -kInf) {
    return std::numeric_limits<double>::denorm_min();
  }
  return b;
}

// Σ_{x >= first} f(x)^power p(x) <= scale * x^exponent * p(x) summed; the
// envelope is exact for caps already exceeded by `first`.
struct Envelope {
  double log_scale = 0.0;
  double exponent = 0.0;
};

Envelope tail_envelope(const CappedFunctional& f, std::int64_t first, int power) {
  Envelope env{0.0, static_cast<double>(power)};
  if (power == 0) {
    return env;
  }
  const double half = power / 2.0;
  for (const double cap : {f.cap_a(), f.cap_b()}) {
    if (cap <= static_cast<double>(first)) {
      env.log_scale += half * std::log(cap);
    } else {
      env.exponent += half;
    }
  }
  return env;
}

// Σ_{x >= first} e^{log_scale} x^e p(x) via the ratio test. The term ratio
// (lambda / (x + 1)) ((x + 1) / x)^e decreases in x, so once it is below one
// at `first` the tail is dominated by a geometric series.
double upper_tail(double lambda, std::int64_t first, const Envelope& env) {
  if (env.log_scale == -kInf) {
    return 0.0;
  }
  const double x0 = static_cast<double>(std::max<std::int64_t>(first, 1));
  const double ratio = lambda / (x0 + 1.0) * std::pow((x0 + 1.0) / x0, env.exponent);
  if (!(ratio < 1.0)) {
    return kInf;
  }
  return certify(env.log_scale + env.exponent * std::log(x0) +
                 detail::log_pmf_saddle(lambda, first) - std::log1p(-ratio));
}

// P(X < first). Below the mean the downward ratio p(x-1)/p(x) = x/lambda is
// at most (first-1)/lambda.
double lower_tail_probability(double lambda, std::int64_t first) {
  if (first <= 0) {
    return 0.0;
  }
  const double top = static_cast<double>(first - 1);
  const double ratio = top / lambda;
  if (!(ratio < 1.0)) {
    return 1.0;
  }
  return std::min(1.0, certify(detail::log_pmf_saddle(lambda, first - 1) -
                                   std::log1p(-ratio)));
}

enum class Target { mean, variance };

struct TailBounds {
  double mass = kInf;    // Σ p
  double first = kInf;   // Σ f p
  double second = kInf;  // Σ f^2 p
};

TailBounds tails_beyond(const CappedFunctional& f, std::int64_t first) {
  TailBounds t;
  t.mass = upper_tail(f.lambda(), first, tail_envelope(f, first, 0));
  t.first = upper_tail(f.lambda(), first, tail_envelope(f, first, 1));
  t.second = upper_tail(f.lambda(), first, tail_envelope(f, first, 2));
  return t;
}

double variance_tail(double mean, const TailBounds& t) {
  return std::max(t.second, 2.0 * mean * t.first + t.first * t.first);
}

std::int64_t initial_cutoff(const CappedFunctional& f) {
  const double lambda = f.lambda();
  double cutoff = std::ceil(lambda + 12.0 * std::sqrt(lambda + 1.0));
  cutoff = std::max(cutoff, static_cast<double>(f.threshold()) + 16.0);
  if (std::isfinite(f.cap_b())) {
    cutoff = std::max(cutoff, std::ceil(f.cap_b()) + 16.0);
  } else if (std::isfinite(f.cap_a())) {
    cutoff = std::max(cutoff, std::ceil(f.cap_a()) + 16.0);
  }
  if (cutoff >= static_cast<double>(kMaxTerms)) {
    throw TruncationError("summation window exceeds the term budget", kInf, 0);
  }
  return static_cast<std::int64_t>(cutoff);
}

CappedMoments run_engine(const CappedFunctional& f, double tol, Target target) {
  require_tolerance(tol);
  CappedMoments out;
  if (f.lambda() == 0.0 || f.cap_a() == 0.0) {
    return out;
  }

  const double lambda = f.lambda();
  const std::int64_t start_cutoff = initial_cutoff(f);
  CompensatedSum first;
  CompensatedSum second;
  CompensatedSum faint_first;
  CompensatedSum faint_second;
  double best = kInf;
  TailBounds tails;
  std::int64_t x = 0;

  for (;; ++x) {
    if (x >= kMaxTerms) {
      throw TruncationError("tolerance not reached within the term budget", best, x);
    }
    const double p = pmf(lambda, x);
    const double fx = f(x);
    first += fx * p;
    second += fx * fx * p;
    if (p < kPmfReliableFloor) {
      faint_first += fx * p;
      faint_second += fx * fx * p;
    }
    if (x < start_cutoff) {
      continue;
    }
    if (fx * fx * p > tol / 16.0) {
      continue;
    }
    tails = tails_beyond(f, x + 1);
    const double bound = target == Target::mean
                             ? tails.first
                             : variance_tail(first.value(), tails);
    best = std::min(best, bound);
    if (bound < tol) {
      break;
    }
  }

  const std::int64_t terms = x + 1;
  const double s1 = first.value();
  const double s2 = second.value();
  const double u = kUnitRoundoff;
  const double round1 = (kPmfRelativeError + 8.0 * u) * s1 + 2.0 * faint_first.value();
  const double round2 = (kPmfRelativeError + 10.0 * u) * s2 + 2.0 * faint_second.value();

  out.mean.value = s1;
  out.mean.tail_bound = tails.first;
  out.mean.rounding_bound = round1;
  out.mean.terms_used = terms;

  const double square = s1 * s1;
  MomentEstimate& var = out.variance;
  var.terms_used = terms;
  if (s2 > kCancellationMagnitude && square > kCancellationMagnitude &&
      std::abs(s2 - square) <= kCancellationDigits * s2) {
    var = detail::centered_variance(f, x, s1);
    var.tail_bound = tails.second + square * tails.mass + tails.first * tails.first;
    var.rounding_bound += (round1 + tails.first) * (round1 + tails.first);
    return out;
  }
  var.value = std::max(0.0, s2 - square);
  var.tail_bound = variance_tail(s1, tails);
  var.rounding_bound = round2 + 2.0 * s1 * round1 + round1 * round1 + 3.0 * u * (s2 + square);
  return out;
}

}  // namespace

CappedFunctional::CappedFunctional(double lambda, double cap_a, double cap_b, int threshold)
    : lambda_(lambda), cap_a_(std::min(cap_a, cap_b)), cap_b_(std::max(cap_a, cap_b)),
      threshold_(threshold) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw std::domain_error("lambda must be finite and nonnegative");
  }
  if (!(cap_a >= 0.0) || !(cap_b >= 0.0)) {
    throw std::domain_error("caps must be nonnegative");
  }
  if (threshold < 0) {
    throw std::domain_error("threshold must be nonnegative");
  }
}

double CappedFunctional::operator()(std::int64_t x) const noexcept {
  if (x < threshold_) {
    return 0.0;
  }
  const double dx = static_cast<double>(x);
  return dx * std::sqrt(std::min(dx, cap_a_) * std::min(dx, cap_b_));
}

double functional_value(std::int64_t x, const CappedFunctional& f) noexcept { return f(x); }

double log_pmf(double lambda, std::int64_t x) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw std::domain_error("log_pmf: lambda must be finite and nonnegative");
  }
  if (x < 0) {
    throw std::domain_error("log_pmf: x must be nonnegative");
  }
  if (lambda == 0.0) {
    return x == 0 ? 0.0 : -kInf;
  }
  const double dx = static_cast<double>(x);
  return -lambda + dx * std::log(lambda) - std::lgamma(dx + 1.0);
}

double pmf(double lambda, std::int64_t x) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw std::domain_error("pmf: lambda must be finite and nonnegative");
  }
  if (x < 0) {
    throw std::domain_error("pmf: x must be nonnegative");
  }
  if (lambda == 0.0) {
    return x == 0 ? 1.0 : 0.0;
  }
  if (x == 0) {
    return std::exp(-lambda);
  }
  const double dx = static_cast<double>(x);
  return std::exp(-detail::stirling_error(x) - detail::deviance(dx, lambda)) /
         std::sqrt(2.0 * std::numbers::pi * dx);
}

CappedMoments moments(const CappedFunctional& f, double tol) {
  return run_engine(f, tol, Target::variance);
}

MomentEstimate expectation(const CappedFunctional& f, double tol) {
  return run_engine(f, tol, Target::mean).mean;
}

MomentEstimate variance(const CappedFunctional& f, double tol) {
  return run_engine(f, tol, Target::variance).variance;
}

CappedMoments plain_indicator_moments(double lambda, double tol) {
  // Unit caps reduce the functional to x 1(x >= 4).
  return moments(CappedFunctional(lambda, 1.0, 1.0), tol);
}

PairwiseVarianceResult variance_pairwise(const CappedFunctional& f, double tol) {
  require_tolerance(tol);
  PairwiseVarianceResult out;
  if (f.lambda() == 0.0 || f.cap_a() == 0.0) {
    return out;
  }

  const double lambda = f.lambda();
  const double spread = 12.0 * std::sqrt(lambda + 1.0);
  const auto step = static_cast<std::int64_t>(std::ceil(std::sqrt(lambda + 1.0)));
  auto hi = static_cast<std::int64_t>(
      std::max(std::ceil(lambda + spread), static_cast<double>(f.threshold()) + 16.0));
  auto lo = static_cast<std::int64_t>(std::max(0.0, std::floor(lambda - spread)));

  // Pairs with either coordinate outside [lo, hi] contribute at most
  // Σ_{x outside} f(x)^2 p(x) + P(X outside) E[f^2]; f is nondecreasing.
  double bound = kInf;
  for (;;) {
    const double tail2 = upper_tail(lambda, hi + 1, tail_envelope(f, hi + 1, 2));
    const double mass_hi = upper_tail(lambda, hi + 1, tail_envelope(f, hi + 1, 0));
    const double mass_lo = lower_tail_probability(lambda, lo);
    const double f_lo = f(lo);
    const double f_hi = f(hi);
    bound = tail2 + f_lo * f_lo * mass_lo + (mass_hi + mass_lo) * (f_hi * f_hi + tail2);
    if (bound <= tol / 2.0) {
      break;
    }
    if (hi - lo > kMaxPairwiseWindow) {
      throw TruncationError("pairwise window exceeds its budget", bound, hi - lo + 1);
    }
    hi += step;
    lo = std::max<std::int64_t>(0, lo - step);
  }

  const auto width = static_cast<std::size_t>(hi - lo + 1);
  std::vector<double> fv(width);
  std::vector<double> pv(width);
  for (std::size_t i = 0; i < width; ++i) {
    const auto x = lo + static_cast<std::int64_t>(i);
    fv[i] = f(x);
    pv[i] = pmf(lambda, x);
  }

  // Sum over i < j; the 1/2 of the identity cancels the symmetric doubling.
  // Pairs touching a faint probability are charged their full spread.
  CompensatedSum total;
  CompensatedSum spread_sum;
  CompensatedSum faint;
  for (std::size_t i = 0; i + 1 < width; ++i) {
    if (pv[i] == 0.0) {
      continue;
    }
    CompensatedSum row;
    CompensatedSum row_spread;
    CompensatedSum row_faint;
    const bool faint_i = pv[i] < kPmfReliableFloor;
    for (std::size_t j = i + 1; j < width; ++j) {
      const double d = fv[i] - fv[j];
      const double w = pv[j];
      row += d * d * w;
      row_spread += std::abs(d) * (fv[i] + fv[j]) * w;
      if (faint_i || w < kPmfReliableFloor) {
        row_faint += d * d * w;
      }
    }
    total += row.value() * pv[i];
    spread_sum += row_spread.value() * pv[i];
    faint += row_faint.value() * pv[i];
  }

  const double u = kUnitRoundoff;
  out.value = total.value();
  out.tail_bound = bound;
  out.rounding_bound =
      (2.0 * kPmfRelativeError + 12.0 * u) * out.value + 6.0 * u * spread_sum.value() +
      2.0 * faint.value();
  out.window_lo = lo;
  out.window_hi = hi;
  return out;
}

namespace detail {

double stirling_error(std::int64_t n) noexcept {
  // Exact values for small n, 25 significant digits.
  static constexpr std::array<double, 16> kSmall = {
      0.0,
      0.08106146679532725821967026,
      0.04134069595540929409382208,
      0.02767792568499833914878929,
      0.02079067210376509311152277,
      0.01664469118982119216319487,
      0.01387612882307074799874573,
      0.01189670994589177009505572,
      0.01041126526197209649747857,
      0.009255462182712732917728637,
      0.008330563433362871256469319,
      0.007573675487951840794972024,
      0.006942840107209529865664153,
      0.006408994188004207068439631,
      0.005951370112758847735624416,
      0.00555473355196280137103869,
  };
  constexpr double s0 = 1.0 / 12.0;
  constexpr double s1 = 1.0 / 360.0;
  constexpr double s2 = 1.0 / 1260.0;
  constexpr double s3 = 1.0 / 1680.0;
  constexpr double s4 = 1.0 / 1188.0;

  if (n < static_cast<std::int64_t>(kSmall.size())) {
    return kSmall[static_cast<std::size_t>(std::max<std::int64_t>(n, 0))];
  }
  const double dn = static_cast<double>(n);
  const double nn = dn * dn;
  if (n > 500) return (s0 - s1 / nn) / dn;
  if (n > 80) return (s0 - (s1 - s2 / nn) / nn) / dn;
  if (n > 35) return (s0 - (s1 - (s2 - s3 / nn) / nn) / nn) / dn;
  return (s0 - (s1 - (s2 - (s3 - s4 / nn) / nn) / nn) / nn) / dn;
}

double deviance(double x, double mean) noexcept {
  if (std::abs(x - mean) < 0.5 * (x + mean)) {
    double v = (x - mean) / (x + mean);
    double s = (x - mean) * v;
    if (std::abs(s) < std::numeric_limits<double>::min()) {
      return s;
    }
    double ej = 2.0 * x * v;
    v *= v;
    for (int j = 1; j < 1000; ++j) {
      ej *= v;
      const double next = s + ej / (2 * j + 1);
      if (next == s) {
        return next;
      }
      s = next;
    }
  }
  return x * std::log(x / mean) + mean - x;
}

double log_pmf_saddle(double lambda, std::int64_t x) noexcept {
  if (lambda == 0.0) {
    return x == 0 ? 0.0 : -kInf;
  }
  if (x == 0) {
    return -lambda;
  }
  const double dx = static_cast<double>(x);
  return -stirling_error(x) - deviance(dx, lambda) - 0.5 * std::log(2.0 * std::numbers::pi * dx);
}

double log_factorial(std::int64_t n) noexcept {
  if (n <= 1) {
    return 0.0;
  }
  const double dn = static_cast<double>(n);
  return stirling_error(n) + (dn + 0.5) * std::log(dn) - dn + kLnSqrt2Pi;
}

MomentEstimate centered_variance(const CappedFunctional& f, std::int64_t last, double mean) {
  CompensatedSum acc;
  CompensatedSum spread;
  CompensatedSum faint;
  for (std::int64_t x = 0; x <= last; ++x) {
    const double fx = f(x);
    const double d = fx - mean;
    const double p = pmf(f.lambda(), x);
    acc += d * d * p;
    spread += std::abs(d) * (fx + mean) * p;
    if (p < kPmfReliableFloor) {
      faint += d * d * p;
    }
  }
  MomentEstimate out;
  out.value = acc.value();
  out.rounding_bound = (kPmfRelativeError + 12.0 * kUnitRoundoff) * out.value +
                       6.0 * kUnitRoundoff * spread.value() + 2.0 * faint.value();
  out.terms_used = last + 1;
  out.cancellation_fallback = true;
  return out;
}

}  // namespace detail

}  // namespace poissonlab
