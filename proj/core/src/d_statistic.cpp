#include "poissonlab/d_statistic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "poissonlab/numeric.hpp"
#include "poissonlab/random.hpp"

namespace poissonlab {

namespace {

struct SliceResult {
  SliceMoments moments;
  double mean_error = 0.0;
  double variance_error = 0.0;
};

}  // namespace

DMoments exact_moments(const DStatisticModel& model, double tol, unsigned threads) {
  model.validate();
  const auto n = static_cast<std::size_t>(model.n);
  std::vector<SliceResult> slices(n);

  parallel_for(n, threads, [&](std::size_t z) {
    SliceResult& out = slices[z];
    out.moments.z = static_cast<int>(z);
    out.moments.rate = model.rates[z];
    out.moments.weight = model.weights[z];
    if (model.rates[z] == 0.0 || model.weights[z] == 0.0) {
      return;
    }
    const CappedFunctional f(model.rates[z], model.cap_a, model.cap_b, model.threshold);
    const CappedMoments m = moments(f, tol);
    const double w = model.weights[z];
    out.moments.raw_mean = m.mean.value;
    out.moments.raw_variance = m.variance.value;
    out.moments.mean = w * m.mean.value;
    out.moments.variance = w * w * m.variance.value;
    out.mean_error = w * m.mean.error_bound();
    out.variance_error = w * w * m.variance.error_bound();
  });

  DMoments result;
  CompensatedSum mean;
  CompensatedSum var;
  double mean_error = 0.0;
  double variance_error = 0.0;
  result.per_z.reserve(n);
  for (const SliceResult& s : slices) {
    mean += s.moments.mean;
    var += s.moments.variance;
    mean_error += s.mean_error;
    variance_error += s.variance_error;
    result.per_z.push_back(s.moments);
  }
  result.mean = mean.value();
  result.variance = var.value();
  result.tail_bound = std::max(mean_error, variance_error);
  return result;
}

double sample_d(const DStatisticModel& model, std::uint64_t seed) {
  CompensatedSum total;
  for (std::size_t z = 0; z < model.rates.size(); ++z) {
    if (model.rates[z] == 0.0 || model.weights[z] == 0.0) {
      continue;
    }
    SplitMix64 rng(derive_seed(seed, {static_cast<std::uint64_t>(z)}));
    const std::int64_t sigma = sample_poisson(model.rates[z], rng);
    if (sigma < model.threshold) {
      continue;
    }
    const double s = static_cast<double>(sigma);
    const double omega = std::sqrt(std::min(s, static_cast<double>(model.cap_a)) *
                                   std::min(s, static_cast<double>(model.cap_b)));
    total += s * omega * model.weights[z];
  }
  return total.value();
}

MCResult mc_moments(const DStatisticModel& model, std::int64_t replications, std::uint64_t seed,
                    unsigned threads) {
  if (replications < 2) {
    throw std::invalid_argument("mc_moments: need at least two replications");
  }
  model.validate();
  const auto reps = static_cast<std::size_t>(replications);
  std::vector<double> draws(reps);
  parallel_for(reps, threads, [&](std::size_t r) {
    draws[r] = sample_d(model, derive_seed(seed, {static_cast<std::uint64_t>(r)}));
  });

  CompensatedSum sum;
  for (const double d : draws) sum += d;
  const double count = static_cast<double>(replications);
  const double mean = sum.value() / count;

  CompensatedSum m2;
  CompensatedSum m4;
  for (const double d : draws) {
    const double c = d - mean;
    const double c2 = c * c;
    m2 += c2;
    m4 += c2 * c2;
  }
  const double var = m2.value() / (count - 1.0);
  const double fourth = m4.value() / count;

  MCResult out;
  out.replications = replications;
  out.seed = seed;
  out.mean_hat = mean;
  out.var_hat = var;
  out.se_mean = std::sqrt(var / count);
  out.se_var = std::sqrt(std::max(0.0, (fourth - (count - 3.0) / (count - 1.0) * var * var) / count));
  return out;
}

std::optional<double> lemma2_ratio(const DMoments& moments) {
  if (!(moments.mean >= kDenominatorFloor)) {
    return std::nullopt;
  }
  return moments.variance / moments.mean;
}

std::optional<double> lemma2_ratio(const DStatisticModel& model, double tol) {
  return lemma2_ratio(exact_moments(model, tol));
}

ProofChainCheck proof_chain(const DStatisticModel& model, const DMoments& moments) {
  const double cells = static_cast<double>(model.cap_a) * model.cap_b;
  ProofChainCheck c;
  CompensatedSum variance;
  CompensatedSum scaled;
  CompensatedSum mean;
  for (const SliceMoments& s : moments.per_z) {
    variance += s.weight * s.weight * s.raw_variance;
    scaled += s.weight * s.weight * cells * s.raw_mean;
    mean += s.weight * s.raw_mean;
    if (s.weight > 0.0 && s.raw_mean >= kDenominatorFloor) {
      c.observed_c1 = std::max(c.observed_c1, s.raw_variance / (cells * s.raw_mean));
      c.slice_ratio_bound = std::max(c.slice_ratio_bound, s.weight * s.raw_variance / s.raw_mean);
    }
  }
  c.variance = variance.value();
  c.scaled_mean = scaled.value();
  c.mean = mean.value();
  // Termwise true by the choice of C1; the slack covers the rounding of the
  // two sums only.
  c.first_step = c.variance <= c.observed_c1 * c.scaled_mean * (1.0 + 1e-12);
  c.second_step = c.scaled_mean <= c.mean / 4.0;
  return c;
}

bool mc_agrees(const MCResult& mc, const DMoments& exact, double k) {
  return std::abs(mc.mean_hat - exact.mean) <= k * mc.se_mean + exact.tail_bound &&
         std::abs(mc.var_hat - exact.variance) <= k * mc.se_var + exact.tail_bound;
}

}  // namespace poissonlab
