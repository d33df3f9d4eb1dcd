#include <gtest/gtest.h>

#include <cmath>

#include "poissonlab/ci_model.hpp"
#include "poissonlab/d_statistic.hpp"

using namespace poissonlab;

namespace {

DStatisticModel single_slice_model() {
  DStatisticModel m;
  m.n = 1;
  m.rates = {10.0};
  m.weights = {1.0 / 16.0};
  m.cap_a = 2;
  m.cap_b = 2;
  return m;
}

double complement_plain_mean(double lambda) {
  double e = lambda;
  double p = std::exp(-lambda);
  for (int x = 1; x <= 3; ++x) {
    p *= lambda / x;
    e -= x * p;
  }
  return e;
}

DStatisticModel perturbed_model(std::uint64_t seed, double m = 1000.0) {
  const JointDistribution null = generate_null(4, 4, 50, seed);
  return build_d_model(perturb(null, 0.5, seed + 1000).joint, m);
}

}  // namespace

TEST(ExactMoments, NullModelIsZero) {
  const DStatisticModel m = build_d_model(generate_null(3, 3, 10, 4), 800.0);
  const DMoments d = exact_moments(m);
  EXPECT_EQ(d.mean, 0.0);
  EXPECT_EQ(d.variance, 0.0);
  EXPECT_FALSE(lemma2_ratio(d).has_value());
  EXPECT_FALSE(lemma2_ratio(m).has_value());
  const MCResult mc = mc_moments(m, 50, 1);
  EXPECT_EQ(mc.mean_hat, 0.0);
  EXPECT_EQ(mc.var_hat, 0.0);
  EXPECT_EQ(sample_d(m, 123), 0.0);
}

TEST(ExactMoments, SingleSliceClosedForm) {
  const DMoments d = exact_moments(single_slice_model());
  EXPECT_NEAR(d.mean, 2.0 * complement_plain_mean(10.0) / 16.0, 1e-12);
  EXPECT_NEAR(d.mean, 1.2465, 1e-4);
  ASSERT_EQ(d.per_z.size(), 1u);
  EXPECT_EQ(d.per_z[0].mean, d.mean);
}

TEST(ExactMoments, AdditivityAndPermutation) {
  DStatisticModel one = single_slice_model();
  DStatisticModel two = one;
  two.n = 2;
  two.rates = {10.0, 10.0};
  two.weights = {1.0 / 16.0, 1.0 / 16.0};
  const DMoments d1 = exact_moments(one);
  const DMoments d2 = exact_moments(two);
  EXPECT_EQ(d2.mean, 2.0 * d1.mean);
  EXPECT_EQ(d2.variance, 2.0 * d1.variance);

  const DStatisticModel m = perturbed_model(3);
  DStatisticModel reversed = m;
  std::reverse(reversed.rates.begin(), reversed.rates.end());
  std::reverse(reversed.weights.begin(), reversed.weights.end());
  const DMoments a = exact_moments(m);
  const DMoments b = exact_moments(reversed);
  EXPECT_NEAR(a.mean, b.mean, 1e-15 * a.mean);
  EXPECT_NEAR(a.variance, b.variance, 1e-15 * a.variance);
}

TEST(ExactMoments, ThreadInvariant) {
  const DStatisticModel m = perturbed_model(5);
  const DMoments a = exact_moments(m, kDefaultTolerance, 1);
  const DMoments b = exact_moments(m, kDefaultTolerance, 8);
  EXPECT_EQ(a.mean, b.mean);
  EXPECT_EQ(a.variance, b.variance);
}

TEST(Lemma2Ratio, HomogeneousInWeights) {
  DStatisticModel m = perturbed_model(2);
  for (double& w : m.weights) w *= 0.25;  // leave room to double
  const double base = *lemma2_ratio(m);
  for (double c : {0.5, 2.0}) {
    DStatisticModel scaled = m;
    for (double& w : scaled.weights) w *= c;
    EXPECT_NEAR(*lemma2_ratio(scaled), c * base, 1e-12 * c * base) << c;
  }
}

TEST(Lemma2Ratio, ProofChainOnPerturbedModels) {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const DStatisticModel m = perturbed_model(seed);
    const DMoments d = exact_moments(m);
    const auto ratio = lemma2_ratio(d);
    ASSERT_TRUE(ratio);
    EXPECT_TRUE(std::isfinite(*ratio));
    const ProofChainCheck c = proof_chain(m, d);
    EXPECT_TRUE(c.first_step);
    EXPECT_TRUE(c.second_step);
    EXPECT_LE(c.variance, c.observed_c1 * c.mean / 4.0 * (1.0 + 1e-12));
    // Var[D]/E[D] is a weighted mean of per-slice ratios.
    EXPECT_LE(*ratio, c.slice_ratio_bound * (1.0 + 1e-12));
  }
}

TEST(SampleD, ZeroRatesAndDeterminism) {
  DStatisticModel zero = single_slice_model();
  zero.rates = {0.0};
  EXPECT_EQ(sample_d(zero, 9), 0.0);
  const DStatisticModel m = perturbed_model(4);
  EXPECT_EQ(sample_d(m, 77), sample_d(m, 77));
  const MCResult a = mc_moments(m, 20'000, 8, 1);
  const MCResult b = mc_moments(m, 20'000, 8, 8);
  EXPECT_EQ(a.mean_hat, b.mean_hat);
  EXPECT_EQ(a.var_hat, b.var_hat);
  EXPECT_EQ(a.se_var, b.se_var);
}

TEST(McMoments, SingleSliceAgreesWithExact) {
  const DStatisticModel m = single_slice_model();
  const DMoments exact = exact_moments(m);
  const MCResult mc = mc_moments(m, 1'000'000, 2024, 0);
  EXPECT_LE(std::abs(mc.mean_hat - exact.mean), 4.0 * mc.se_mean);
  EXPECT_LE(std::abs(mc.var_hat - exact.variance), 4.0 * mc.se_var);
  EXPECT_TRUE(mc_agrees(mc, exact));
}

TEST(McMoments, RejectsTooFewReplications) {
  EXPECT_THROW(mc_moments(single_slice_model(), 1, 1), std::invalid_argument);
}

TEST(DStatisticModel, WeightBound) {
  DStatisticModel m = single_slice_model();
  m.weights = {1.0 / 15.0};
  EXPECT_THROW(m.validate(), std::invalid_argument);
  m.weights = {1.0 / 16.0};
  m.rates = {-1.0};
  EXPECT_THROW(m.validate(), std::invalid_argument);
}
