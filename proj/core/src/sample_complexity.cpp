#include "poissonlab/sample_complexity.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "poissonlab/inequality_lab.hpp"

namespace poissonlab {

namespace {

struct Exponents {
  double n, l1, l2, inv_eps;
};

// Display order.
constexpr std::array<Exponents, 5> kExponents = {{
    {7.0 / 8.0, 1.0 / 4.0, 1.0 / 4.0, 1.0},
    {6.0 / 7.0, 2.0 / 7.0, 2.0 / 7.0, 8.0 / 7.0},
    {3.0 / 4.0, 1.0 / 2.0, 1.0 / 2.0, 1.0},
    {2.0 / 3.0, 2.0 / 3.0, 1.0 / 3.0, 4.0 / 3.0},
    {1.0 / 2.0, 1.0 / 2.0, 1.0 / 2.0, 2.0},
}};

}  // namespace

std::string to_string(ComplexityTerm term) {
  switch (term) {
    case ComplexityTerm::T1a: return "T1a";
    case ComplexityTerm::T1b: return "T1b";
    case ComplexityTerm::T2: return "T2";
    case ComplexityTerm::T3: return "T3";
    case ComplexityTerm::T4: return "T4";
  }
  return "unknown";
}

void ComplexityInputs::validate() const {
  if (!(n >= 1.0) || !(l1 >= 1.0) || !(l2 >= 1.0) || !std::isfinite(n) || !std::isfinite(l1) ||
      !std::isfinite(l2)) {
    throw std::domain_error("complexity: n, l1, l2 must be finite and >= 1");
  }
  if (!(eps > 0.0) || eps > 1.0) {
    throw std::domain_error("complexity: eps must lie in (0, 1]");
  }
}

ComplexityResult evaluate(const ComplexityInputs& inputs) {
  inputs.validate();
  const double ln_n = std::log(inputs.n);
  const double ln_l1 = std::log(inputs.l1);
  const double ln_l2 = std::log(inputs.l2);
  const double ln_inv_eps = -std::log(inputs.eps);

  std::array<double, 5> logs{};
  ComplexityResult r;
  r.inputs = inputs;
  for (std::size_t i = 0; i < kExponents.size(); ++i) {
    const Exponents& e = kExponents[i];
    logs[i] = e.n * ln_n + e.l1 * ln_l1 + e.l2 * ln_l2 + e.inv_eps * ln_inv_eps;
    r.terms[i] = std::exp(logs[i]);
  }

  // min over the pair, then max with the rest; strict comparisons keep the
  // earlier term on ties.
  std::size_t active = logs[1] < logs[0] ? 1 : 0;
  std::size_t dominant = active;
  for (std::size_t i = 2; i < logs.size(); ++i) {
    if (logs[i] > logs[dominant]) {
      dominant = i;
    }
  }
  r.active_term = static_cast<ComplexityTerm>(active);
  r.dominant_regime = static_cast<ComplexityTerm>(dominant);
  r.value = std::exp(logs[dominant]);
  return r;
}

ComplexityResult evaluate_min_ordering(const ComplexityInputs& inputs) {
  ComplexityResult as_given = evaluate(inputs);
  ComplexityInputs swapped = inputs;
  std::swap(swapped.l1, swapped.l2);
  ComplexityResult other = evaluate(swapped);
  return other.value < as_given.value ? other : as_given;
}

std::vector<double> LogRange::values() const {
  return log_spaced(std::min(lo, hi), std::max(lo, hi), count);
}

std::vector<ComplexityResult> regime_map(const LogRange& n_range, double l1, double l2,
                                         const LogRange& eps_range, bool min_over_orderings) {
  std::vector<double> ns = n_range.values();
  for (double& n : ns) {
    n = std::round(n);
  }
  std::sort(ns.begin(), ns.end());
  ns.erase(std::unique(ns.begin(), ns.end()), ns.end());
  std::vector<double> epss = eps_range.values();
  std::sort(epss.begin(), epss.end());
  epss.erase(std::unique(epss.begin(), epss.end()), epss.end());

  std::vector<ComplexityResult> rows;
  rows.reserve(ns.size() * epss.size());
  for (const double n : ns) {
    for (const double eps : epss) {
      const ComplexityInputs in{n, l1, l2, eps};
      rows.push_back(min_over_orderings ? evaluate_min_ordering(in) : evaluate(in));
    }
  }
  return rows;
}

}  // namespace poissonlab
