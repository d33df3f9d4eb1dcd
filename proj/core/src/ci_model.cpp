#include "poissonlab/ci_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "poissonlab/numeric.hpp"
#include "poissonlab/random.hpp"

namespace poissonlab {

namespace {

enum SeedStream : std::uint64_t { kZMarginal = 0, kXMarginal = 1, kYMarginal = 2 };

std::vector<double> flat_dirichlet(std::size_t k, SplitMix64& rng) {
  std::vector<double> w(k);
  CompensatedSum total;
  for (double& v : w) {
    v = -std::log1p(-rng.uniform());
    total += v;
  }
  const double t = total.value();
  for (double& v : w) {
    v /= t;
  }
  return w;
}

// Random ±1 vector with both signs present, centered and scaled so the
// largest magnitude is 1.
std::vector<double> centered_signs(int k, SplitMix64& rng) {
  std::vector<double> s(static_cast<std::size_t>(k));
  int positives = 0;
  for (double& v : s) {
    v = (rng() >> 63) != 0 ? 1.0 : -1.0;
    positives += v > 0 ? 1 : 0;
  }
  if (positives == 0 || positives == k) {
    const auto flip = static_cast<std::size_t>(rng() % static_cast<std::uint64_t>(k));
    s[flip] = -s[flip];
  }
  double mean = 0.0;
  for (const double v : s) mean += v;
  mean /= k;
  double peak = 0.0;
  for (double& v : s) {
    v -= mean;
    peak = std::max(peak, std::abs(v));
  }
  for (double& v : s) v /= peak;
  return s;
}

}  // namespace

JointDistribution::JointDistribution(int l1, int l2, int n, std::vector<double> pmf,
                                     std::uint64_t seed,
                                     std::map<std::string, std::string> metadata)
    : l1_(l1), l2_(l2), n_(n), pmf_(std::move(pmf)), seed_(seed), metadata_(std::move(metadata)) {
  if (l1 < 1 || l2 < 1 || n < 1) {
    throw std::invalid_argument("joint distribution: sizes must be positive");
  }
  const auto cells = static_cast<std::size_t>(l1) * static_cast<std::size_t>(l2) *
                     static_cast<std::size_t>(n);
  if (pmf_.size() != cells) {
    throw std::invalid_argument("joint distribution: pmf has " + std::to_string(pmf_.size()) +
                                " entries, expected " + std::to_string(cells));
  }
  CompensatedSum total;
  for (const double p : pmf_) {
    if (!std::isfinite(p) || p < 0.0) {
      throw std::invalid_argument("joint distribution: entries must be finite and nonnegative");
    }
    total += p;
  }
  if (std::abs(total.value() - 1.0) > kMassTolerance) {
    throw std::invalid_argument("joint distribution: total mass is not 1");
  }
}

ConditionalSlice slice(const JointDistribution& joint, int z) {
  if (z < 0 || z >= joint.n()) {
    throw std::out_of_range("slice: z out of range");
  }
  const int l1 = joint.l1();
  const int l2 = joint.l2();
  ConditionalSlice s;
  s.z = z;

  CompensatedSum mass;
  for (int x = 0; x < l1; ++x) {
    for (int y = 0; y < l2; ++y) {
      mass += joint.at(x, y, z);
    }
  }
  s.mass = mass.value();
  if (s.mass <= 0.0) {
    s.mass = 0.0;
    return s;
  }

  const auto cells = static_cast<std::size_t>(l1) * static_cast<std::size_t>(l2);
  s.joint.resize(cells);
  std::vector<double> row(static_cast<std::size_t>(l1), 0.0);
  std::vector<double> col(static_cast<std::size_t>(l2), 0.0);
  for (int x = 0; x < l1; ++x) {
    for (int y = 0; y < l2; ++y) {
      const double p = joint.at(x, y, z) / s.mass;
      s.joint[static_cast<std::size_t>(x * l2 + y)] = p;
      row[static_cast<std::size_t>(x)] += p;
      col[static_cast<std::size_t>(y)] += p;
    }
  }
  s.product.resize(cells);
  CompensatedSum l1_distance;
  for (int x = 0; x < l1; ++x) {
    for (int y = 0; y < l2; ++y) {
      const auto i = static_cast<std::size_t>(x * l2 + y);
      s.product[i] = row[static_cast<std::size_t>(x)] * col[static_cast<std::size_t>(y)];
      l1_distance += std::abs(s.joint[i] - s.product[i]);
    }
  }
  s.eps = std::clamp(0.5 * l1_distance.value(), 0.0, 1.0);
  s.eps_prime = s.eps / std::sqrt(4.0 * l1 * l2);
  return s;
}

void DStatisticModel::validate() const {
  if (n < 1 || rates.size() != static_cast<std::size_t>(n) ||
      weights.size() != static_cast<std::size_t>(n)) {
    throw std::invalid_argument("D model: rates and weights must have n entries");
  }
  if (cap_a < 1 || cap_b < 1 || threshold < 0) {
    throw std::invalid_argument("D model: caps must be positive and threshold nonnegative");
  }
  const double weight_limit = 1.0 / (4.0 * cap_a * cap_b) * (1.0 + 1e-12);
  for (std::size_t z = 0; z < rates.size(); ++z) {
    if (!std::isfinite(rates[z]) || rates[z] < 0.0) {
      throw std::invalid_argument("D model: rates must be finite and nonnegative");
    }
    if (!std::isfinite(weights[z]) || weights[z] < 0.0 || weights[z] > weight_limit) {
      throw std::invalid_argument("D model: weights must lie in [0, 1/(4 l1 l2)]");
    }
  }
}

DStatisticModel build_d_model(const JointDistribution& joint, double m) {
  if (!(m > 0.0) || !std::isfinite(m)) {
    throw std::invalid_argument("D model: m must be positive and finite");
  }
  DStatisticModel model;
  model.n = joint.n();
  model.cap_a = joint.l1();
  model.cap_b = joint.l2();
  model.threshold = 4;
  model.rates.reserve(static_cast<std::size_t>(joint.n()));
  model.weights.reserve(static_cast<std::size_t>(joint.n()));
  for (int z = 0; z < joint.n(); ++z) {
    const ConditionalSlice s = slice(joint, z);
    model.rates.push_back(m * s.mass);
    // Slices within rounding of independence carry no signal.
    const double eps_prime = s.eps <= kMassTolerance ? 0.0 : s.eps_prime;
    model.weights.push_back(eps_prime * eps_prime);
  }
  return model;
}

JointDistribution generate_null(int l1, int l2, int n, std::uint64_t seed) {
  if (l1 < 1 || l2 < 1 || n < 1) {
    throw std::invalid_argument("generate_null: sizes must be positive");
  }
  SplitMix64 z_rng(derive_seed(seed, {kZMarginal}));
  const std::vector<double> z_marginal = flat_dirichlet(static_cast<std::size_t>(n), z_rng);

  std::vector<double> pmf(static_cast<std::size_t>(l1) * static_cast<std::size_t>(l2) *
                          static_cast<std::size_t>(n));
  const auto ul2 = static_cast<std::size_t>(l2);
  const auto un = static_cast<std::size_t>(n);
  for (std::size_t z = 0; z < un; ++z) {
    SplitMix64 x_rng(derive_seed(seed, {kXMarginal, z}));
    SplitMix64 y_rng(derive_seed(seed, {kYMarginal, z}));
    const auto px = flat_dirichlet(static_cast<std::size_t>(l1), x_rng);
    const auto py = flat_dirichlet(ul2, y_rng);
    for (std::size_t x = 0; x < px.size(); ++x) {
      for (std::size_t y = 0; y < ul2; ++y) {
        pmf[(x * ul2 + y) * un + z] = z_marginal[z] * px[x] * py[y];
      }
    }
  }
  return JointDistribution(l1, l2, n, std::move(pmf), seed, {{"generator", "null"}});
}

PerturbResult perturb(const JointDistribution& joint, double magnitude, std::uint64_t seed) {
  if (!(magnitude > 0.0) || magnitude > 1.0) {
    throw std::invalid_argument("perturb: magnitude must lie in (0, 1]");
  }
  const int l1 = joint.l1();
  const int l2 = joint.l2();
  std::vector<double> pmf = joint.pmf();
  bool clipped = false;

  if (l1 >= 2 && l2 >= 2) {
    const double cells = static_cast<double>(l1) * l2;
    for (int z = 0; z < joint.n(); ++z) {
      CompensatedSum mass_sum;
      for (int x = 0; x < l1; ++x) {
        for (int y = 0; y < l2; ++y) {
          mass_sum += joint.at(x, y, z);
        }
      }
      const double mass = mass_sum.value();
      if (mass <= 0.0) {
        continue;
      }
      SplitMix64 rng(derive_seed(seed, {static_cast<std::uint64_t>(z)}));
      const auto u = centered_signs(l1, rng);
      const auto v = centered_signs(l2, rng);

      // Largest scale keeping every entry nonnegative.
      double feasible = std::numeric_limits<double>::infinity();
      for (int x = 0; x < l1; ++x) {
        for (int y = 0; y < l2; ++y) {
          const double unit = mass * u[static_cast<std::size_t>(x)] * v[static_cast<std::size_t>(y)] / cells;
          if (unit < 0.0) {
            feasible = std::min(feasible, joint.at(x, y, z) / -unit);
          }
        }
      }
      double scale = magnitude;
      if (scale > feasible) {
        scale = feasible;
        clipped = true;
      }
      for (int x = 0; x < l1; ++x) {
        for (int y = 0; y < l2; ++y) {
          const double delta =
              scale * mass * u[static_cast<std::size_t>(x)] * v[static_cast<std::size_t>(y)] / cells;
          double& cell = pmf[joint.index(x, y, z)];
          cell = std::max(0.0, cell + delta);
        }
      }
    }
  }

  auto metadata = joint.metadata();
  metadata["perturb_magnitude"] = format_double(magnitude);
  metadata["perturb_seed"] = std::to_string(seed);
  metadata["perturb_clipped"] = clipped ? "true" : "false";
  PerturbResult result{JointDistribution(l1, l2, joint.n(), std::move(pmf), joint.seed(),
                                         std::move(metadata)),
                       clipped,
                       {}};
  for (int z = 0; z < joint.n(); ++z) {
    result.eps.push_back(slice(result.joint, z).eps);
  }
  return result;
}

}  // namespace poissonlab
