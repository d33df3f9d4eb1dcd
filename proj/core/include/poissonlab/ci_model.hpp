#pragma once

// Discrete joint distributions of (X, Y, Z) on [l1] x [l2] x [n], their
// conditional slices given Z = z, and the per-slice distances from
// conditional independence that weight the Poissonized statistic D.
//
// Indices are zero-based throughout: x in [0, l1), y in [0, l2), z in [0, n).

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace poissonlab {

inline constexpr double kMassTolerance = 1e-12;

class JointDistribution {
 public:
  /// `pmf` is flat row-major over (x, y, z): index ((x * l2) + y) * n + z.
  /// Throws std::invalid_argument unless sizes match, every entry is finite
  /// and nonnegative, and the total mass is 1 within kMassTolerance.
  JointDistribution(int l1, int l2, int n, std::vector<double> pmf, std::uint64_t seed = 0,
                    std::map<std::string, std::string> metadata = {});

  [[nodiscard]] int l1() const noexcept { return l1_; }
  [[nodiscard]] int l2() const noexcept { return l2_; }
  [[nodiscard]] int n() const noexcept { return n_; }
  [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }
  [[nodiscard]] const std::vector<double>& pmf() const noexcept { return pmf_; }
  [[nodiscard]] const std::map<std::string, std::string>& metadata() const noexcept {
    return metadata_;
  }

  [[nodiscard]] std::size_t index(int x, int y, int z) const noexcept {
    return (static_cast<std::size_t>(x) * static_cast<std::size_t>(l2_) +
            static_cast<std::size_t>(y)) *
               static_cast<std::size_t>(n_) +
           static_cast<std::size_t>(z);
  }
  [[nodiscard]] double at(int x, int y, int z) const noexcept { return pmf_[index(x, y, z)]; }

  friend bool operator==(const JointDistribution&, const JointDistribution&) = default;

 private:
  int l1_;
  int l2_;
  int n_;
  std::vector<double> pmf_;
  std::uint64_t seed_;
  std::map<std::string, std::string> metadata_;
};

/// The conditional law of (X, Y) given Z = z against the product of its
/// marginals. Tables are l1 x l2 row-major and empty when mass == 0.
struct ConditionalSlice {
  int z = 0;
  double mass = 0.0;
  std::vector<double> joint;
  std::vector<double> product;
  /// Total variation between joint and product (half the L1 distance).
  double eps = 0.0;
  /// eps / sqrt(4 l1 l2).
  double eps_prime = 0.0;
};

ConditionalSlice slice(const JointDistribution& joint, int z);

/// D = Σ_z σ_z ω_z w_z 1(σ_z >= threshold), σ_z ~ Poisson(rates[z])
/// independent, ω_z = sqrt(min(σ_z, cap_a) min(σ_z, cap_b)).
struct DStatisticModel {
  int n = 0;
  std::vector<double> rates;
  std::vector<double> weights;
  int cap_a = 1;
  int cap_b = 1;
  int threshold = 4;

  /// Throws std::invalid_argument on length mismatch, negative entries, or a
  /// weight above 1 / (4 cap_a cap_b).
  void validate() const;

  friend bool operator==(const DStatisticModel&, const DStatisticModel&) = default;
};

/// rates = m P(Z = z), weights = eps_prime_z^2, caps (l1, l2). Slices with
/// eps_z <= kMassTolerance get weight 0.
DStatisticModel build_d_model(const JointDistribution& joint, double m);

/// A distribution with X independent of Y given Z: the Z marginal and both
/// conditional marginals of every slice are flat-Dirichlet draws.
JointDistribution generate_null(int l1, int l2, int n, std::uint64_t seed);

struct PerturbResult {
  JointDistribution joint;
  /// The requested magnitude would have pushed an entry negative in at
  /// least one slice; those slices were scaled down to the feasible limit.
  bool clipped = false;
  std::vector<double> eps;
};

/// Adds δ_z(x, y) = magnitude * mass_z * u_x v_y / (l1 l2) to every slice,
/// where u and v are centered random sign vectors scaled to max |.| = 1.
/// Row and column sums of δ are zero, so the slice marginals and the total
/// mass are preserved. Requires magnitude in (0, 1].
PerturbResult perturb(const JointDistribution& joint, double magnitude, std::uint64_t seed);

}  // namespace poissonlab
