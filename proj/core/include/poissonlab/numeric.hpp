#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <string>

namespace poissonlab {

/// Ratios whose denominator falls below this are reported as skipped.
inline constexpr double kDenominatorFloor = 1e-300;

/// Unit roundoff of binary64.
inline constexpr double kUnitRoundoff = std::numeric_limits<double>::epsilon() / 2;

/// Neumaier's variant of Kahan summation. Also tracks the sum of magnitudes so
/// callers can bound the accumulated rounding error.
class CompensatedSum {
 public:
  void add(double term) noexcept {
    const double t = sum_ + term;
    if (std::abs(sum_) >= std::abs(term)) {
      compensation_ += (sum_ - t) + term;
    } else {
      compensation_ += (term - t) + sum_;
    }
    sum_ = t;
    magnitude_ += term < 0 ? -term : term;
  }

  CompensatedSum& operator+=(double term) noexcept {
    add(term);
    return *this;
  }

  [[nodiscard]] double value() const noexcept { return sum_ + compensation_; }
  [[nodiscard]] double magnitude() const noexcept { return magnitude_; }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
  double magnitude_ = 0.0;
};

/// Runs body(i) for i in [0, count) on up to `threads` workers. Work is split
/// into contiguous index blocks; callers write results by index, so output
/// never depends on the thread count. threads == 0 means hardware concurrency.
void parallel_for(std::size_t count, unsigned threads,
                  const std::function<void(std::size_t)>& body);

/// Shortest decimal that round-trips to the same double ('.' decimal point,
/// no grouping); "inf", "-inf" and "nan" for non-finite values.
std::string format_double(double value);

/// Clamps a requested thread count to something usable.
unsigned resolve_threads(unsigned requested) noexcept;

}  // namespace poissonlab
