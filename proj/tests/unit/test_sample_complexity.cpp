#include <gtest/gtest.h>

#include <cmath>

#include "poissonlab/sample_complexity.hpp"

using namespace poissonlab;

namespace {

// Direct power evaluation in long double.
long double direct_term(int term, long double n, long double l1, long double l2, long double eps) {
  switch (term) {
    case 0: return std::pow(n, 7.0L / 8) * std::pow(l1, 0.25L) * std::pow(l2, 0.25L) / eps;
    case 1: return std::pow(n, 6.0L / 7) * std::pow(l1, 2.0L / 7) * std::pow(l2, 2.0L / 7) /
                   std::pow(eps, 8.0L / 7);
    case 2: return std::pow(n, 0.75L) * std::sqrt(l1) * std::sqrt(l2) / eps;
    case 3: return std::pow(n, 2.0L / 3) * std::pow(l1, 2.0L / 3) * std::cbrt(l2) /
                   std::pow(eps, 4.0L / 3);
    default: return std::sqrt(n) * std::sqrt(l1) * std::sqrt(l2) / (eps * eps);
  }
}

void expect_relative(double got, long double want, double digits_tol = 1e-12) {
  EXPECT_LE(std::abs(static_cast<long double>(got) - want) / want, digits_tol)
      << got << " vs " << static_cast<double>(want);
}

}  // namespace

TEST(Evaluate, UnitCase) {
  const ComplexityResult r = evaluate({1, 1, 1, 1});
  for (double t : r.terms) EXPECT_EQ(t, 1.0);
  EXPECT_EQ(r.value, 1.0);
  EXPECT_EQ(r.active_term, ComplexityTerm::T1a);
  EXPECT_EQ(r.dominant_regime, ComplexityTerm::T1a);
}

TEST(Evaluate, MatchesDirectArithmetic) {
  for (auto [n, l1, l2, eps] : {std::tuple{1e6, 2.0, 2.0, 0.1}, {37.0, 5.0, 900.0, 0.73},
                                {1e12, 1e3, 7.0, 1e-4}, {2.0, 1.0, 1.0, 1.0}}) {
    const ComplexityResult r = evaluate({n, l1, l2, eps});
    for (int t = 0; t < 5; ++t) {
      expect_relative(r.terms[static_cast<std::size_t>(t)], direct_term(t, n, l1, l2, eps));
    }
    const long double min_pair = std::min(direct_term(0, n, l1, l2, eps), direct_term(1, n, l1, l2, eps));
    const long double want = std::max({min_pair, direct_term(2, n, l1, l2, eps),
                                       direct_term(3, n, l1, l2, eps), direct_term(4, n, l1, l2, eps)});
    expect_relative(r.value, want);
    EXPECT_EQ(r.value, std::max({std::min(r.terms[0], r.terms[1]), r.terms[2], r.terms[3], r.terms[4]}));
  }
  const ComplexityResult r = evaluate({1e6, 2, 2, 0.1});
  EXPECT_EQ(r.active_term, ComplexityTerm::T1a);
  EXPECT_EQ(r.dominant_regime, ComplexityTerm::T1a);
}

TEST(Evaluate, ExponentSignaturesByDoubling) {
  const ComplexityInputs base{1e5, 3.0, 5.0, 0.2};
  const ComplexityResult r0 = evaluate(base);
  const double n_exp[] = {7.0 / 8, 6.0 / 7, 3.0 / 4, 2.0 / 3, 1.0 / 2};
  const double l1_exp[] = {1.0 / 4, 2.0 / 7, 1.0 / 2, 2.0 / 3, 1.0 / 2};
  const double l2_exp[] = {1.0 / 4, 2.0 / 7, 1.0 / 2, 1.0 / 3, 1.0 / 2};
  const double e_exp[] = {1.0, 8.0 / 7, 1.0, 4.0 / 3, 2.0};

  ComplexityInputs in = base;
  in.n *= 2;
  const ComplexityResult rn = evaluate(in);
  in = base;
  in.l1 *= 2;
  const ComplexityResult rl1 = evaluate(in);
  in = base;
  in.l2 *= 2;
  const ComplexityResult rl2 = evaluate(in);
  in = base;
  in.eps /= 2;
  const ComplexityResult re = evaluate(in);
  for (std::size_t t = 0; t < 5; ++t) {
    expect_relative(rn.terms[t] / r0.terms[t], std::pow(2.0L, n_exp[t]));
    expect_relative(rl1.terms[t] / r0.terms[t], std::pow(2.0L, l1_exp[t]));
    expect_relative(rl2.terms[t] / r0.terms[t], std::pow(2.0L, l2_exp[t]));
    expect_relative(re.terms[t] / r0.terms[t], std::pow(2.0L, e_exp[t]));
  }
  expect_relative(rn.term(ComplexityTerm::T4) / r0.term(ComplexityTerm::T4), std::sqrt(2.0L));
}

TEST(Evaluate, Monotone) {
  const double ns[] = {1, 100, 1e4, 1e8};
  const double ls[] = {1, 3, 30, 3000};
  const double es[] = {1, 0.3, 0.01, 1e-4};
  for (double l : ls) {
    for (double e : es) {
      double prev = 0.0;
      for (double n : ns) {
        const double v = evaluate({n, l, l, e}).value;
        EXPECT_GE(v, prev);
        prev = v;
      }
      prev = 0.0;
      for (double l1 : ls) {
        const double v = evaluate({1e4, l1, l, e}).value;
        EXPECT_GE(v, prev);
        prev = v;
      }
      prev = 0.0;
      for (double l2 : ls) {
        const double v = evaluate({1e4, l, l2, e}).value;
        EXPECT_GE(v, prev);
        prev = v;
      }
    }
    for (double n : ns) {
      double prev = 0.0;
      for (double e : es) {
        const double v = evaluate({n, l, l, e}).value;
        EXPECT_GE(v, prev);
        prev = v;
      }
    }
  }
}

TEST(Evaluate, DomainErrors) {
  EXPECT_THROW(evaluate({10, 2, 2, 0.0}), std::domain_error);
  EXPECT_THROW(evaluate({10, 2, 2, 1.5}), std::domain_error);
  EXPECT_THROW(evaluate({0.5, 2, 2, 0.5}), std::domain_error);
  EXPECT_THROW(evaluate({10, 0, 2, 0.5}), std::domain_error);
}

TEST(Evaluate, BothOrderingsTakesMinimum) {
  const ComplexityInputs in{10.0, 1e6, 1.0, 0.5};
  ComplexityInputs swapped = in;
  std::swap(swapped.l1, swapped.l2);
  const double want = std::min(evaluate(in).value, evaluate(swapped).value);
  EXPECT_EQ(evaluate_min_ordering(in).value, want);
  EXPECT_LT(want, evaluate(in).value);
}

TEST(RegimeMap, SinglePointMatchesEvaluate) {
  const auto rows = regime_map({1e4, 1e4, 1}, 3.0, 4.0, {0.2, 0.2, 1});
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].value, evaluate({1e4, 3.0, 4.0, 0.2}).value);
}

TEST(RegimeMap, LabelsChangeMonotonicallyAlongN) {
  const auto rows = regime_map({10, 1e8, 50}, 2.0, 2.0, {0.5, 0.5, 1});
  std::vector<ComplexityTerm> seen;
  for (const auto& r : rows) {
    if (seen.empty() || seen.back() != r.dominant_regime) {
      EXPECT_EQ(std::find(seen.begin(), seen.end(), r.dominant_regime), seen.end())
          << "regime " << to_string(r.dominant_regime) << " reappears";
      seen.push_back(r.dominant_regime);
    }
  }
  EXPECT_GE(seen.size(), 2u);
  for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_LT(rows[i - 1].inputs.n, rows[i].inputs.n);
}

TEST(RegimeMap, OrderOfRangeEndpointsIrrelevant) {
  const auto a = regime_map({10, 1e6, 5}, 2.0, 3.0, {0.01, 0.9, 4});
  const auto b = regime_map({1e6, 10, 5}, 2.0, 3.0, {0.9, 0.01, 4});
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].inputs.n, b[i].inputs.n);
    EXPECT_EQ(a[i].inputs.eps, b[i].inputs.eps);
    EXPECT_EQ(a[i].value, b[i].value);
  }
}
