#pragma once

// Numerical certificates for variance-to-mean inequalities of the capped
// Poisson functional X_{a,b} = X sqrt(min(X,a) min(X,b)) 1(X >= 4):
//
//   corrected  Var[X_{a,b}] / (max{ab, sqrt(a) b, sqrt(ab)} E[X_{a,b}])   bounded
//   original   Var[X_{a,b}] / E[X_{a,b}]                                  unbounded
//   claim21    Var[X 1(X>=4)] / E[X 1(X>=4)]                               bounded
//   claim23    E[X_{a,b}] / min(lambda sqrt(min(lambda,a) min(lambda,b)), lambda^4)
//              bounded away from zero for integer caps >= 2

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "poissonlab/poisson_core.hpp"

namespace poissonlab {

struct RatioValue {
  double numerator = 0.0;
  double denominator = 0.0;
  double ratio = 0.0;
  /// Absolute error bar on `ratio` propagated from the moment error bounds.
  double error_bound = 0.0;
};

/// max{ab, sqrt(a) b, sqrt(ab)} with the caps taken in a <= b order.
double correction_factor(double a, double b);

// Each ratio returns std::nullopt ("skipped") when its denominator is below
// kDenominatorFloor; the inequality is vacuous there.
std::optional<RatioValue> corrected_lemma_ratio(double lambda, double a, double b,
                                                double tol = kDefaultTolerance);
std::optional<RatioValue> original_claim_ratio(double lambda, double a, double b,
                                               double tol = kDefaultTolerance);
std::optional<RatioValue> claim21_ratio(double lambda, double tol = kDefaultTolerance);
/// Throws std::domain_error unless a and b are integers >= 2.
std::optional<RatioValue> claim23_ratio(double lambda, double a, double b,
                                        double tol = kDefaultTolerance);

/// Counterexample search for the uncorrected inequality along a = b = k,
/// lambda = 100 k^2, k = 4, 8, 16, ...
struct FalsifyStep {
  std::int64_t k = 0;
  double lambda = 0.0;
  double ratio = 0.0;
  double error_bound = 0.0;
};

struct FalsifyResult {
  bool found = false;
  double target = 0.0;
  /// The witness when found, otherwise the best point reached.
  FalsifyStep witness;
  std::vector<FalsifyStep> schedule;
  /// Empty when found; otherwise why the search stopped.
  std::string stop_reason;
};

inline constexpr std::int64_t kFalsifyStartK = 4;
inline constexpr std::int64_t kFalsifyMaxK = std::int64_t{1} << 20;

FalsifyResult falsify_original_claim(double target_ratio, double tol = kDefaultTolerance);

/// True when every step of the schedule at least doubles the previous ratio,
/// up to the two points' certified error bars.
bool ratio_doubles_along_schedule(const FalsifyResult& result);

/// h(lambda) = min(lambda, lambda^4) /
///             ((lambda^4 + 6 lambda^3 + 7 lambda^2 + lambda)
///              (1 + lambda + lambda^2/2 + lambda^3/6) e^{-lambda})
double h_function(double lambda);

/// The lower bound on h is only asserted for lambda >= 1.
inline bool h_in_regime(double lambda) noexcept { return lambda >= 1.0; }

struct HInfimum {
  double value = 0.0;
  double arg_lambda = 0.0;
  double lambda_max = 0.0;
  int grid_points = 0;
  /// h kept increasing through the last grid steps and 10 steps past
  /// lambda_max, so the infimum over [1, inf) is attained on the grid range.
  bool tail_certified = false;
};

inline constexpr double kHDefaultLambdaMax = 60.0;
inline constexpr int kHDefaultGridPoints = 10'000;

HInfimum h_infimum(double lambda_max = kHDefaultLambdaMax,
                   int grid_points = kHDefaultGridPoints);

enum class RatioKind { corrected, original, claim21, claim23 };

std::string to_string(RatioKind kind);
RatioKind ratio_kind_from_string(const std::string& name);

struct GridPoint {
  double lambda = 0.0;
  double a = 0.0;
  double b = 0.0;

  friend bool operator==(const GridPoint&, const GridPoint&) = default;
};

/// Cartesian product lambda_points x cap_pairs. The claim21 ratio ignores
/// the caps and is evaluated once per lambda.
struct GridSpec {
  std::vector<double> lambda_points;
  std::vector<std::pair<double, double>> cap_pairs;
  double tol = kDefaultTolerance;

  /// Throws std::invalid_argument on empty lists, non-finite values, or a > b.
  void validate() const;

  static GridSpec default_for(RatioKind kind);
};

/// count points log-spaced over [lo, hi], endpoints included.
std::vector<double> log_spaced(double lo, double hi, int count);

/// All pairs a <= b drawn from `caps` (duplicates removed, sorted).
std::vector<std::pair<double, double>> cap_pairs_from(std::vector<double> caps);

struct RatioRecord {
  GridPoint point;
  double numerator = 0.0;
  double denominator = 0.0;
  double ratio = 0.0;
};

struct PointFailure {
  GridPoint point;
  std::string message;
};

struct RatioCertificate {
  RatioKind kind = RatioKind::corrected;
  double tol = kDefaultTolerance;
  std::vector<RatioRecord> records;
  double sup_ratio = 0.0;
  double inf_ratio = 0.0;
  GridPoint arg_sup;
  GridPoint arg_inf;
  std::vector<GridPoint> skipped;
  std::vector<PointFailure> failures;
};

/// Evaluates the chosen ratio on every grid point. Points may run in
/// parallel; records keep grid order and the result is independent of
/// `threads`.
RatioCertificate sweep(const GridSpec& grid, RatioKind kind, unsigned threads = 1);

struct PlateauCheck {
  double a = 0.0;
  double b = 0.0;
  double ratio_low = 0.0;
  double ratio_high = 0.0;
  double relative_change = 0.0;
  bool holds = false;
};

inline constexpr double kPlateauLambdaLow = 1e3;
inline constexpr double kPlateauLambdaHigh = 1e4;
inline constexpr double kPlateauTolerance = 0.10;

/// For each cap pair with a, b >= 1 that has records at both lambdas, the
/// relative change of the ratio between them.
std::vector<PlateauCheck> plateau_checks(const RatioCertificate& cert,
                                         double lambda_low = kPlateauLambdaLow,
                                         double lambda_high = kPlateauLambdaHigh,
                                         double tolerance = kPlateauTolerance);

}  // namespace poissonlab
