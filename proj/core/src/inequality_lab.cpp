#include "poissonlab/inequality_lab.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <tuple>
#include <variant>

#include "poissonlab/numeric.hpp"

namespace poissonlab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

// Error bar for num/den given absolute errors on both.
double quotient_error(double num, double num_err, double den, double den_err) {
  const double slack = den - den_err;
  if (!(slack > 0.0)) {
    return kInf;
  }
  return (num_err + std::abs(num / den) * den_err) / slack;
}

std::optional<RatioValue> variance_over_scaled_mean(const CappedMoments& m, double factor) {
  const double den = factor * m.mean.value;
  if (!(den >= kDenominatorFloor)) {
    return std::nullopt;
  }
  RatioValue r;
  r.numerator = m.variance.value;
  r.denominator = den;
  r.ratio = r.numerator / den;
  r.error_bound =
      quotient_error(r.numerator, m.variance.error_bound(), den, factor * m.mean.error_bound());
  return r;
}

bool is_integer_cap(double c) { return std::isfinite(c) && c >= 2.0 && std::floor(c) == c; }

auto lex_key(const GridPoint& p) { return std::tie(p.lambda, p.a, p.b); }

bool near(double x, double target) { return std::abs(x - target) <= 1e-9 * std::abs(target); }

}  // namespace

double correction_factor(double a, double b) {
  const double lo = std::min(a, b);
  const double hi = std::max(a, b);
  return std::max({lo * hi, std::sqrt(lo) * hi, std::sqrt(lo * hi)});
}

std::optional<RatioValue> corrected_lemma_ratio(double lambda, double a, double b, double tol) {
  const CappedFunctional f(lambda, a, b);
  return variance_over_scaled_mean(moments(f, tol), correction_factor(f.cap_a(), f.cap_b()));
}

std::optional<RatioValue> original_claim_ratio(double lambda, double a, double b, double tol) {
  return variance_over_scaled_mean(moments(CappedFunctional(lambda, a, b), tol), 1.0);
}

std::optional<RatioValue> claim21_ratio(double lambda, double tol) {
  return variance_over_scaled_mean(plain_indicator_moments(lambda, tol), 1.0);
}

std::optional<RatioValue> claim23_ratio(double lambda, double a, double b, double tol) {
  if (!is_integer_cap(a) || !is_integer_cap(b)) {
    throw std::domain_error("claim23_ratio: caps must be integers >= 2");
  }
  const CappedFunctional f(lambda, a, b);
  const MomentEstimate mean = expectation(f, tol);
  const double capped = lambda * std::sqrt(std::min(lambda, f.cap_a()) * std::min(lambda, f.cap_b()));
  const double den = std::min(capped, std::pow(lambda, 4));
  if (!(den >= kDenominatorFloor)) {
    return std::nullopt;
  }
  RatioValue r;
  r.numerator = mean.value;
  r.denominator = den;
  r.ratio = mean.value / den;
  r.error_bound = mean.error_bound() / den;
  return r;
}

FalsifyResult falsify_original_claim(double target_ratio, double tol) {
  if (!(target_ratio > 0.0) || !std::isfinite(target_ratio)) {
    throw std::domain_error("falsify: target ratio must be positive and finite");
  }
  FalsifyResult result;
  result.target = target_ratio;
  for (std::int64_t k = kFalsifyStartK; k <= kFalsifyMaxK; k *= 2) {
    const double cap = static_cast<double>(k);
    const double lambda = 100.0 * cap * cap;
    std::optional<RatioValue> r;
    try {
      r = original_claim_ratio(lambda, cap, cap, tol);
    } catch (const TruncationError& e) {
      result.stop_reason = "term budget exhausted at k=" + std::to_string(k) + ": " + e.what();
      return result;
    }
    if (!r) {
      continue;
    }
    const FalsifyStep step{k, lambda, r->ratio, r->error_bound};
    result.schedule.push_back(step);
    if (result.schedule.size() == 1 || step.ratio > result.witness.ratio) {
      result.witness = step;
    }
    if (step.ratio >= target_ratio) {
      result.found = true;
      result.witness = step;
      return result;
    }
  }
  result.stop_reason = "schedule exceeded k = 2^20";
  return result;
}

bool ratio_doubles_along_schedule(const FalsifyResult& result) {
  const auto& s = result.schedule;
  if (s.size() < 2) {
    return false;
  }
  for (std::size_t i = 1; i < s.size(); ++i) {
    if (s[i].ratio + s[i].error_bound < 2.0 * (s[i - 1].ratio - s[i - 1].error_bound)) {
      return false;
    }
  }
  return true;
}

double h_function(double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw std::domain_error("h_function: lambda must be positive and finite");
  }
  const double l2 = lambda * lambda;
  const double l3 = l2 * lambda;
  const double l4 = l3 * lambda;
  const double fourth_moment = l4 + 6.0 * l3 + 7.0 * l2 + lambda;
  const double head_mass = 1.0 + lambda + l2 / 2.0 + l3 / 6.0;
  const double log_h =
      std::log(std::min(lambda, l4)) - std::log(fourth_moment) - std::log(head_mass) + lambda;
  return std::exp(log_h);
}

HInfimum h_infimum(double lambda_max, int grid_points) {
  if (!(lambda_max >= 1.0) || !std::isfinite(lambda_max)) {
    throw std::domain_error("h_infimum: lambda_max must be finite and >= 1");
  }
  if (grid_points < 2) {
    throw std::domain_error("h_infimum: need at least two grid points");
  }
  const double step = (lambda_max - 1.0) / (grid_points - 1);
  const auto at = [&](int i) { return i == grid_points - 1 ? lambda_max : 1.0 + step * i; };

  std::vector<double> values(static_cast<std::size_t>(grid_points));
  int best = 0;
  for (int i = 0; i < grid_points; ++i) {
    values[static_cast<std::size_t>(i)] = h_function(at(i));
    if (values[static_cast<std::size_t>(i)] < values[static_cast<std::size_t>(best)]) {
      best = i;
    }
  }

  HInfimum out;
  out.lambda_max = lambda_max;
  out.grid_points = grid_points;
  out.value = values[static_cast<std::size_t>(best)];
  out.arg_lambda = at(best);

  // Golden-section refinement on the bracket around the coarse minimizer.
  if (step > 0.0) {
    double lo = at(std::max(best - 1, 0));
    double hi = at(std::min(best + 1, grid_points - 1));
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = hi - inv_phi * (hi - lo);
    double d = lo + inv_phi * (hi - lo);
    double hc = h_function(c);
    double hd = h_function(d);
    while (hi - lo > 1e-12 * std::max(1.0, hi)) {
      if (hc < hd) {
        hi = d;
        d = c;
        hd = hc;
        c = hi - inv_phi * (hi - lo);
        hc = h_function(c);
      } else {
        lo = c;
        c = d;
        hc = hd;
        d = lo + inv_phi * (hi - lo);
        hd = h_function(d);
      }
    }
    const double mid = (lo + hi) / 2.0;
    const double hmid = h_function(mid);
    if (hmid < out.value) {
      out.value = hmid;
      out.arg_lambda = mid;
    }
  }

  // Tail: increasing over the last grid steps and for 10 steps beyond.
  constexpr int kSteps = 10;
  bool increasing = grid_points - 1 >= kSteps && step > 0.0;
  for (int i = grid_points - kSteps; increasing && i < grid_points; ++i) {
    increasing = values[static_cast<std::size_t>(i)] > values[static_cast<std::size_t>(i - 1)];
  }
  double prev = values.back();
  for (int j = 1; increasing && j <= kSteps; ++j) {
    const double next = h_function(lambda_max + step * j);
    increasing = next > prev;
    prev = next;
  }
  out.tail_certified = increasing;
  return out;
}

std::string to_string(RatioKind kind) {
  switch (kind) {
    case RatioKind::corrected: return "corrected";
    case RatioKind::original: return "original";
    case RatioKind::claim21: return "claim21";
    case RatioKind::claim23: return "claim23";
  }
  return "unknown";
}

RatioKind ratio_kind_from_string(const std::string& name) {
  if (name == "corrected" || name == "lemma1") return RatioKind::corrected;
  if (name == "original") return RatioKind::original;
  if (name == "claim21") return RatioKind::claim21;
  if (name == "claim23") return RatioKind::claim23;
  throw std::invalid_argument("unknown ratio kind: " + name);
}

void GridSpec::validate() const {
  if (lambda_points.empty() || cap_pairs.empty()) {
    throw std::invalid_argument("grid: lambda and cap lists must be nonempty");
  }
  for (const double l : lambda_points) {
    if (!std::isfinite(l) || l < 0.0) {
      throw std::invalid_argument("grid: lambda points must be finite and nonnegative");
    }
  }
  for (const auto& [a, b] : cap_pairs) {
    if (!std::isfinite(a) || !std::isfinite(b) || a < 0.0 || a > b) {
      throw std::invalid_argument("grid: cap pairs need finite 0 <= a <= b");
    }
  }
  if (!(tol > 0.0) || !std::isfinite(tol)) {
    throw std::invalid_argument("grid: tolerance must be positive");
  }
}

std::vector<double> log_spaced(double lo, double hi, int count) {
  if (!(lo > 0.0) || !(hi >= lo) || count < 1) {
    throw std::invalid_argument("log_spaced: need 0 < lo <= hi and count >= 1");
  }
  if (count == 1) {
    return {lo};
  }
  const double e_lo = std::log10(lo);
  const double e_hi = std::log10(hi);
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    out.push_back(std::pow(10.0, e_lo + (e_hi - e_lo) * i / (count - 1)));
  }
  out.front() = lo;
  out.back() = hi;
  return out;
}

std::vector<std::pair<double, double>> cap_pairs_from(std::vector<double> caps) {
  std::sort(caps.begin(), caps.end());
  caps.erase(std::unique(caps.begin(), caps.end()), caps.end());
  std::vector<std::pair<double, double>> pairs;
  for (std::size_t i = 0; i < caps.size(); ++i) {
    for (std::size_t j = i; j < caps.size(); ++j) {
      pairs.emplace_back(caps[i], caps[j]);
    }
  }
  return pairs;
}

GridSpec GridSpec::default_for(RatioKind kind) {
  GridSpec g;
  g.lambda_points = log_spaced(1e-2, 1e4, 25);
  switch (kind) {
    case RatioKind::corrected:
    case RatioKind::original:
      g.cap_pairs = cap_pairs_from({0.5, 1, 2, 4, 16, 64, 256});
      break;
    case RatioKind::claim21:
      g.cap_pairs = {{1.0, 1.0}};
      break;
    case RatioKind::claim23:
      g.cap_pairs = cap_pairs_from({2, 4, 16, 64, 256});
      break;
  }
  return g;
}

RatioCertificate sweep(const GridSpec& grid, RatioKind kind, unsigned threads) {
  grid.validate();
  if (kind == RatioKind::claim23) {
    for (const auto& [a, b] : grid.cap_pairs) {
      if (!is_integer_cap(a) || !is_integer_cap(b)) {
        throw std::invalid_argument("grid: claim23 needs integer caps >= 2");
      }
    }
  }

  std::vector<GridPoint> points;
  for (const double lambda : grid.lambda_points) {
    if (kind == RatioKind::claim21) {
      points.push_back({lambda, 1.0, 1.0});
      continue;
    }
    for (const auto& [a, b] : grid.cap_pairs) {
      points.push_back({lambda, a, b});
    }
  }

  struct Skipped {};
  using Outcome = std::variant<RatioRecord, Skipped, PointFailure>;
  std::vector<Outcome> outcomes(points.size(), Skipped{});

  parallel_for(points.size(), threads, [&](std::size_t i) {
    const GridPoint& p = points[i];
    try {
      std::optional<RatioValue> r;
      switch (kind) {
        case RatioKind::corrected: r = corrected_lemma_ratio(p.lambda, p.a, p.b, grid.tol); break;
        case RatioKind::original: r = original_claim_ratio(p.lambda, p.a, p.b, grid.tol); break;
        case RatioKind::claim21: r = claim21_ratio(p.lambda, grid.tol); break;
        case RatioKind::claim23: r = claim23_ratio(p.lambda, p.a, p.b, grid.tol); break;
      }
      if (r) {
        outcomes[i] = RatioRecord{p, r->numerator, r->denominator, r->ratio};
      }
    } catch (const std::exception& e) {
      outcomes[i] = PointFailure{p, e.what()};
    }
  });

  RatioCertificate cert;
  cert.kind = kind;
  cert.tol = grid.tol;
  cert.sup_ratio = kNaN;
  cert.inf_ratio = kNaN;
  for (auto& outcome : outcomes) {
    if (auto* rec = std::get_if<RatioRecord>(&outcome)) {
      const bool first = cert.records.empty();
      if (first || rec->ratio > cert.sup_ratio ||
          (rec->ratio == cert.sup_ratio && lex_key(rec->point) < lex_key(cert.arg_sup))) {
        cert.sup_ratio = rec->ratio;
        cert.arg_sup = rec->point;
      }
      if (first || rec->ratio < cert.inf_ratio ||
          (rec->ratio == cert.inf_ratio && lex_key(rec->point) < lex_key(cert.arg_inf))) {
        cert.inf_ratio = rec->ratio;
        cert.arg_inf = rec->point;
      }
      cert.records.push_back(*rec);
    } else if (auto* fail = std::get_if<PointFailure>(&outcome)) {
      cert.failures.push_back(std::move(*fail));
    }
  }
  // Second pass so `skipped` keeps grid order alongside records.
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    if (std::holds_alternative<Skipped>(outcomes[i])) {
      cert.skipped.push_back(points[i]);
    }
  }
  return cert;
}

std::vector<PlateauCheck> plateau_checks(const RatioCertificate& cert, double lambda_low,
                                         double lambda_high, double tolerance) {
  std::vector<PlateauCheck> checks;
  for (const RatioRecord& low : cert.records) {
    if (!near(low.point.lambda, lambda_low) || low.point.a < 1.0 || low.point.b < 1.0) {
      continue;
    }
    const auto high = std::find_if(cert.records.begin(), cert.records.end(), [&](const RatioRecord& r) {
      return near(r.point.lambda, lambda_high) && r.point.a == low.point.a && r.point.b == low.point.b;
    });
    if (high == cert.records.end()) {
      continue;
    }
    PlateauCheck c;
    c.a = low.point.a;
    c.b = low.point.b;
    c.ratio_low = low.ratio;
    c.ratio_high = high->ratio;
    c.relative_change = std::abs(c.ratio_high - c.ratio_low) / c.ratio_low;
    c.holds = c.relative_change < tolerance;
    checks.push_back(c);
  }
  return checks;
}

}  // namespace poissonlab
