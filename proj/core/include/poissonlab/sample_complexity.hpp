#pragma once

// Evaluates the conditional-independence sample complexity bound
//
//   max{ min{T1a, T1b}, T2, T3, T4 }
//
//   T1a = n^{7/8} l1^{1/4} l2^{1/4} / eps
//   T1b = n^{6/7} l1^{2/7} l2^{2/7} / eps^{8/7}
//   T2  = n^{3/4} l1^{1/2} l2^{1/2} / eps
//   T3  = n^{2/3} l1^{2/3} l2^{1/3} / eps^{4/3}
//   T4  = n^{1/2} l1^{1/2} l2^{1/2} / eps^2
//
// with the implied constant set to 1 (values are "up to constants").

#include <array>
#include <string>
#include <vector>

namespace poissonlab {

enum class ComplexityTerm { T1a = 0, T1b, T2, T3, T4 };

std::string to_string(ComplexityTerm term);

struct ComplexityInputs {
  double n = 1.0;
  double l1 = 1.0;
  double l2 = 1.0;
  double eps = 1.0;

  /// Throws std::domain_error unless n, l1, l2 >= 1 and eps in (0, 1].
  void validate() const;
};

struct ComplexityResult {
  ComplexityInputs inputs;
  /// Indexed by ComplexityTerm.
  std::array<double, 5> terms{};
  double value = 0.0;
  /// The smaller member of the {T1a, T1b} pair.
  ComplexityTerm active_term = ComplexityTerm::T1a;
  /// The term attaining the outer max.
  ComplexityTerm dominant_regime = ComplexityTerm::T1a;

  [[nodiscard]] double term(ComplexityTerm t) const noexcept {
    return terms[static_cast<std::size_t>(t)];
  }
};

/// Terms are computed in log space; ties go to the earlier term in the
/// display order T1a, T1b, T2, T3, T4.
ComplexityResult evaluate(const ComplexityInputs& inputs);

/// Evaluates both (l1, l2) orderings and returns the one with the smaller
/// value (the expression is not symmetric in l1 and l2).
ComplexityResult evaluate_min_ordering(const ComplexityInputs& inputs);

struct LogRange {
  double lo = 1.0;
  double hi = 1.0;
  int count = 1;

  [[nodiscard]] std::vector<double> values() const;
};

/// Evaluates every (n, eps) pair; n values are rounded to integers. Rows
/// are sorted by (n, eps) ascending whatever the input order.
std::vector<ComplexityResult> regime_map(const LogRange& n_range, double l1, double l2,
                                         const LogRange& eps_range,
                                         bool min_over_orderings = false);

}  // namespace poissonlab
