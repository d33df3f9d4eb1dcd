#include "poissonlab/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "poissonlab/numeric.hpp"
#include "poissonlab/random.hpp"

namespace poissonlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Draws are summed in fixed-size blocks so the reduction order is the same
// for any thread count.
constexpr std::size_t kBlock = 4096;

}  // namespace

std::vector<GridPoint> pinned_oracle_points() {
  static const std::pair<double, double> caps[] = {
      {1.0, 1.0}, {2.0, 8.0}, {4.0, 4.0}, {0.5, 16.0}, {16.0, 64.0}, {kInf, kInf}, {3.0, 100.0}};
  const std::vector<double> lambdas = log_spaced(1e-2, 1e4, 20);
  std::vector<GridPoint> points;
  points.reserve(lambdas.size());
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    const auto& [a, b] = caps[i % std::size(caps)];
    points.push_back({lambdas[i], a, b});
  }
  return points;
}

double central_fourth_moment(const CappedFunctional& f, double mean) {
  const double lambda = f.lambda();
  if (lambda == 0.0) {
    return std::pow(mean, 4);
  }
  const auto hi = static_cast<std::int64_t>(std::ceil(lambda + 40.0 * std::sqrt(lambda + 1.0))) + 64;
  CompensatedSum m4;
  for (std::int64_t x = 0; x <= hi; ++x) {
    const double c = functional_value(x, f) - mean;
    m4 += c * c * c * c * pmf(lambda, x);
  }
  return m4.value();
}

OracleRow oracle_check(const GridPoint& point, std::int64_t draws, std::uint64_t seed, double k,
                       double tol, unsigned threads) {
  if (draws < 2) {
    throw std::invalid_argument("oracle_check: need at least two draws");
  }
  const CappedFunctional f(point.lambda, point.a, point.b);
  OracleRow row;
  row.point = point;
  row.draws = draws;

  const CappedMoments m = moments(f, tol);
  row.mean = m.mean.value;
  row.mean_error = m.mean.error_bound();
  row.variance = m.variance.value;
  row.variance_error = m.variance.error_bound();

  const PairwiseVarianceResult pw = variance_pairwise(f, tol);
  row.pairwise = pw.value;
  row.pairwise_error = pw.error_bound();
  row.pairwise_agrees = std::abs(row.variance - row.pairwise) <= row.variance_error + row.pairwise_error;

  // Shifting by the exact mean keeps the second pass well conditioned.
  const auto n = static_cast<std::size_t>(draws);
  const std::size_t blocks = (n + kBlock - 1) / kBlock;
  std::vector<double> s1(blocks);
  std::vector<double> s2(blocks);
  parallel_for(blocks, threads, [&](std::size_t blk) {
    CompensatedSum a;
    CompensatedSum b;
    const std::size_t end = std::min(n, (blk + 1) * kBlock);
    for (std::size_t i = blk * kBlock; i < end; ++i) {
      SplitMix64 rng(derive_seed(seed, {static_cast<std::uint64_t>(i)}));
      const double d = functional_value(sample_poisson(point.lambda, rng), f) - row.mean;
      a += d;
      b += d * d;
    }
    s1[blk] = a.value();
    s2[blk] = b.value();
  });
  CompensatedSum sum1;
  CompensatedSum sum2;
  for (std::size_t blk = 0; blk < blocks; ++blk) {
    sum1 += s1[blk];
    sum2 += s2[blk];
  }
  const double count = static_cast<double>(draws);
  const double shift = sum1.value() / count;
  row.mc_mean = row.mean + shift;
  row.mc_variance = std::max(0.0, (sum2.value() - count * shift * shift) / (count - 1.0));

  const double mu4 = central_fourth_moment(f, row.mean);
  const double var = std::max(0.0, row.variance);
  row.se_mean = std::sqrt(var / count);
  row.se_variance = std::sqrt(std::max(0.0, (mu4 - (count - 3.0) / (count - 1.0) * var * var) / count));
  row.mc_mean_agrees = std::abs(row.mc_mean - row.mean) <= k * row.se_mean + row.mean_error;
  row.mc_variance_agrees =
      std::abs(row.mc_variance - row.variance) <= k * row.se_variance + row.variance_error;
  return row;
}

}  // namespace poissonlab
