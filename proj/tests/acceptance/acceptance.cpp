// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "commands.hpp"
#include "poissonlab/ci_model.hpp"
#include "poissonlab/inequality_lab.hpp"
#include "poissonlab/oracle.hpp"
#include "poissonlab/random.hpp"
#include "poissonlab/sample_complexity.hpp"
#include "poissonlab/serialize.hpp"

namespace fs = std::filesystem;
using namespace poissonlab;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
};

struct CliRun {
  int code = 0;
  std::string out;
  std::string err;
  double seconds = 0.0;
};

CliRun cli(const std::vector<std::string>& args) {
  std::ostringstream out;
  std::ostringstream err;
  const auto t0 = std::chrono::steady_clock::now();
  CliRun r;
  r.code = cli::run(args, out, err);
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), {}};
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// ---------------------------------------------------------------------------

Outcome h_infimum_reproduction() {
  Outcome o;
  const CliRun r = cli({"h"});
  o.require(r.code == 0, "exit " + std::to_string(r.code));
  const Json doc = Json::parse(r.out);
  const double inf = doc["inf"].get<double>();
  o.require(std::abs(inf - 0.0119) <= 1e-3, "inf " + fmt(inf));
  o.require(r.seconds < 5.0, "runtime " + fmt(r.seconds) + " s");
  o.detail = o.pass ? "inf=" + fmt(inf) + " at lambda=" + fmt(doc["arg_lambda"].get<double>()) +
                          ", " + fmt(r.seconds) + " s"
                    : o.detail;
  return o;
}

Outcome original_claim_falsification() {
  Outcome o;
  const CliRun r = cli({"falsify", "--target", "50"});
  o.require(r.code == 0, "exit " + std::to_string(r.code));
  o.require(r.seconds < 60.0, "runtime " + fmt(r.seconds) + " s");
  const Json doc = Json::parse(r.out);
  const Json& w = doc["witness"];
  const double k = w["a"].get<double>();
  const auto again = original_claim_ratio(w["lambda"].get<double>(), k, k);
  o.require(again && again->ratio >= 50.0, "recomputed witness ratio below 50");
  const FalsifyResult res = falsify_original_claim(50.0);
  o.require(res.schedule.size() >= 2, "schedule too short to test doubling");
  o.require(ratio_doubles_along_schedule(res), "ratio does not double along the schedule");
  for (std::size_t i = 1; i < res.schedule.size(); ++i) {
    o.require(res.schedule[i].ratio >= 2.0 * res.schedule[i - 1].ratio * (1.0 - 1e-9),
              "step k=" + std::to_string(res.schedule[i].k) + " ratio " +
                  fmt(res.schedule[i].ratio));
  }
  if (o.pass) {
    o.detail = "witness k=" + fmt(k) + " lambda=" + fmt(w["lambda"].get<double>()) +
               " ratio=" + fmt(again->ratio) + ", " + std::to_string(res.schedule.size()) +
               " steps, " + fmt(r.seconds) + " s";
  }
  return o;
}

Outcome corrected_lemma_certification() {
  Outcome o;
  const GridSpec grid = GridSpec::default_for(RatioKind::corrected);
  o.require(grid.lambda_points.size() >= 25, "fewer than 25 lambda points");
  o.require(grid.cap_pairs.size() >= 28, "fewer than 28 cap pairs");
  const RatioCertificate cert = sweep(grid, RatioKind::corrected, 0);
  o.require(cert.failures.empty(), std::to_string(cert.failures.size()) + " point failures");
  o.require(cert.records.size() == grid.lambda_points.size() * grid.cap_pairs.size(),
            "not every point produced a record");
  o.require(std::isfinite(cert.sup_ratio), "sup not finite");
  std::size_t expected_pairs = 0;
  for (const auto& [a, b] : grid.cap_pairs) expected_pairs += a >= 1.0 && b >= 1.0;
  const std::vector<PlateauCheck> checks = plateau_checks(cert);
  o.require(checks.size() == expected_pairs, "plateau checks missing for some cap pairs");
  double worst = 0.0;
  for (const PlateauCheck& p : checks) {
    worst = std::max(worst, p.relative_change);
    o.require(p.relative_change < 0.10, "plateau fails at a=" + fmt(p.a) + " b=" + fmt(p.b));
  }
  if (o.pass) {
    o.detail = std::to_string(cert.records.size()) + " records, sup=" + fmt(cert.sup_ratio) +
               ", " + std::to_string(checks.size()) + " plateau pairs, worst change " + fmt(worst);
  }
  return o;
}

Outcome claim21_claim23() {
  Outcome o;
  const RatioCertificate c21 = sweep(GridSpec::default_for(RatioKind::claim21), RatioKind::claim21, 0);
  const RatioCertificate c23 = sweep(GridSpec::default_for(RatioKind::claim23), RatioKind::claim23, 0);
  o.require(c21.failures.empty() && c23.failures.empty(), "point failures");
  o.require(!c21.records.empty() && std::isfinite(c21.sup_ratio), "claim21 sup not finite");
  o.require(!c23.records.empty() && c23.inf_ratio > 0.0, "claim23 inf not positive");
  const auto at100 = claim21_ratio(100.0);
  o.require(at100 && at100->ratio >= 0.99 && at100->ratio <= 1.01, "claim21 ratio at lambda=100");
  if (o.pass) {
    o.detail = "claim21 sup=" + fmt(c21.sup_ratio) + ", claim23 inf=" + fmt(c23.inf_ratio) +
               ", claim21(100)=" + fmt(at100->ratio);
  }
  return o;
}

Outcome oracle_equivalence() {
  Outcome o;
  const std::vector<GridPoint> points = pinned_oracle_points();
  o.require(points.size() == 20, "expected 20 pinned points");
  o.require(points.front().lambda <= 0.01 * (1 + 1e-12) && points.back().lambda >= 1e4 * (1 - 1e-12),
            "points do not span [0.01, 1e4]");
  for (std::size_t i = 0; i < points.size(); ++i) {
    const OracleRow row = oracle_check(points[i], 1'000'000, derive_seed(1, {i}), 4.0,
                                       kDefaultTolerance, 0);
    const std::string where = "lambda=" + fmt(row.point.lambda);
    o.require(row.pairwise_agrees, "pairwise disagrees at " + where);
    o.require(row.mc_mean_agrees, "MC mean outside 4 SE at " + where);
    o.require(row.mc_variance_agrees, "MC variance outside 4 SE at " + where);
  }
  if (o.pass) o.detail = "20 points, 10^6 draws each";
  return o;
}

Outcome lemma2_desk_scale() {
  Outcome o;
  double slowest = 0.0;
  for (int seed = 1; seed <= 5; ++seed) {
    const CliRun r = cli({"--seed", std::to_string(seed), "simulate-d", "--l1", "4", "--l2", "4",
                          "--n", "50", "--m", "1000", "--reps", "100000"});
    slowest = std::max(slowest, r.seconds);
    const std::string tag = "seed " + std::to_string(seed) + ": ";
    o.require(r.code == 0, tag + "exit " + std::to_string(r.code));
    if (r.out.empty()) continue;
    const Json doc = Json::parse(r.out);
    o.require(doc["proof_chain"]["first_step"].get<bool>(), tag + "first step fails");
    o.require(doc["proof_chain"]["second_step"].get<bool>(), tag + "1/4 step fails");
    o.require(doc["mc_agrees"].get<bool>(), tag + "MC outside 4 SE");
    o.require(r.seconds < 30.0, tag + "runtime " + fmt(r.seconds) + " s");
    // The 1/4 step needs every weight within 1/(4 l1 l2).
    for (const auto& w : doc["model"]["weights"]) {
      o.require(w.get<double>() <= 1.0 / 64.0 * (1 + 1e-12), tag + "weight above 1/64");
    }
  }
  if (o.pass) o.detail = "seeds 1-5, slowest " + fmt(slowest) + " s";
  return o;
}

Outcome tv_brute_force() {
  Outcome o;
  std::mt19937_64 rng(77);
  std::exponential_distribution<double> e(1.0);
  std::uniform_int_distribution<int> side(1, 6);
  double worst = 0.0;
  for (int t = 0; t < 50; ++t) {
    int l1 = 0;
    int l2 = 0;
    do {
      l1 = side(rng);
      l2 = side(rng);
    } while (l1 * l2 > 12 || l1 * l2 < 2);
    std::vector<double> cells(static_cast<std::size_t>(l1 * l2));
    double total = 0.0;
    for (double& c : cells) total += c = e(rng);
    for (double& c : cells) c /= total;
    const ConditionalSlice s = slice(JointDistribution(l1, l2, 1, cells), 0);
    double sup = 0.0;
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << cells.size()); ++mask) {
      double diff = 0.0;
      for (std::size_t i = 0; i < cells.size(); ++i) {
        if (mask >> i & 1) diff += s.joint[i] - s.product[i];
      }
      sup = std::max(sup, std::abs(diff));
    }
    worst = std::max(worst, std::abs(s.eps - sup));
  }
  o.require(worst <= 1e-12, "max deviation " + fmt(worst));
  if (o.pass) o.detail = "50 slices, max deviation " + fmt(worst);
  return o;
}

Outcome complexity_evaluator() {
  Outcome o;
  const ComplexityResult unit = evaluate({1, 1, 1, 1});
  o.require(unit.value == 1.0, "unit case not exactly 1");
  const double n_exp[] = {7.0 / 8, 6.0 / 7, 3.0 / 4, 2.0 / 3, 1.0 / 2};
  const double l1_exp[] = {1.0 / 4, 2.0 / 7, 1.0 / 2, 2.0 / 3, 1.0 / 2};
  const double l2_exp[] = {1.0 / 4, 2.0 / 7, 1.0 / 2, 1.0 / 3, 1.0 / 2};
  const double e_exp[] = {1.0, 8.0 / 7, 1.0, 4.0 / 3, 2.0};
  const ComplexityInputs base{1e5, 3.0, 7.0, 0.05};
  const ComplexityResult r0 = evaluate(base);
  const auto check = [&](ComplexityInputs in, const double* exps, const char* name) {
    const ComplexityResult r = evaluate(in);
    for (std::size_t t = 0; t < 5; ++t) {
      const double want = std::pow(2.0, exps[t]);
      const double got = r.terms[t] / r0.terms[t];
      o.require(std::abs(got - want) <= 1e-12 * want,
                std::string("doubling ") + name + " on " + to_string(static_cast<ComplexityTerm>(t)));
    }
  };
  ComplexityInputs in = base;
  in.n *= 2;
  check(in, n_exp, "n");
  in = base;
  in.l1 *= 2;
  check(in, l1_exp, "l1");
  in = base;
  in.l2 *= 2;
  check(in, l2_exp, "l2");
  in = base;
  in.eps /= 2;
  check(in, e_exp, "1/eps");

  const double grid4[] = {1.0, 10.0, 1e3, 1e6};
  const double eps4[] = {1.0, 0.5, 0.1, 0.01};
  for (int var = 0; var < 4; ++var) {
    double prev = 0.0;
    for (int i = 0; i < 4; ++i) {
      ComplexityInputs p{1e4, 4.0, 4.0, 0.2};
      if (var == 0) p.n = grid4[i];
      if (var == 1) p.l1 = grid4[i];
      if (var == 2) p.l2 = grid4[i];
      if (var == 3) p.eps = eps4[i];
      const double v = evaluate(p).value;
      o.require(v >= prev, "monotonicity fails for variable " + std::to_string(var));
      prev = v;
    }
  }
  if (o.pass) o.detail = "unit case, 20 doubling signatures, 4 monotone sweeps";
  return o;
}

Outcome determinism() {
  Outcome o;
  const fs::path dir = fs::temp_directory_path() / "poissonlab_acceptance";
  fs::create_directories(dir);
  const std::vector<std::vector<std::string>> runs = {
      {"certify", "lemma1"},
      {"certify", "claim21"},
      {"certify", "claim23"},
      {"falsify", "--target", "50"},
      {"simulate-d", "--reps", "20000"},
      {"complexity", "--n-range", "10,1e8,20", "--eps-range", "0.01,1,5"},
      {"h"},
      {"oracle-check", "--draws", "100000"},
  };
  int compared = 0;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    for (const char* format : {"json", "csv"}) {
      std::string files[2];
      for (int t = 0; t < 2; ++t) {
        const std::string threads = t == 0 ? "1" : "8";
        const fs::path out = dir / ("run" + std::to_string(i) + "_" + format + "_t" + threads);
        std::vector<std::string> args = {"--threads", threads, "--format", format, "--output",
                                         out.string()};
        args.insert(args.end(), runs[i].begin(), runs[i].end());
        const CliRun r = cli(args);
        if (r.code != 0 && r.code != 2) {
          o.require(false, runs[i][0] + " exit " + std::to_string(r.code));
        }
        if (runs[i][0] == "simulate-d") {
          Json doc = Json::parse(slurp(out.string() + ".json"));
          doc["metadata"].erase("generated_at");
          files[t] = doc.dump() + slurp(out.string() + ".csv");
        } else if (std::string(format) == "csv") {
          Json meta = Json::parse(slurp(out.string() + ".meta.json"));
          meta.erase("generated_at");
          files[t] = slurp(out) + meta.dump();
        } else {
          Json doc = Json::parse(slurp(out));
          doc["metadata"].erase("generated_at");
          files[t] = doc.dump();
        }
      }
      o.require(!files[0].empty() && files[0] == files[1],
                runs[i][0] + " (" + format + ") differs between 1 and 8 threads");
      ++compared;
    }
  }
  if (o.pass) o.detail = std::to_string(compared) + " runs identical at 1 and 8 threads";
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"h-infimum reproduction", h_infimum_reproduction},
      {"original claim falsification", original_claim_falsification},
      {"corrected lemma certification", corrected_lemma_certification},
      {"claim21 and claim23 sweeps", claim21_claim23},
      {"oracle equivalence", oracle_equivalence},
      {"D statistic at desk scale", lemma2_desk_scale},
      {"eps_z brute-force equivalence", tv_brute_force},
      {"sample complexity evaluator", complexity_evaluator},
      {"thread-count determinism", determinism},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    failures += o.pass ? 0 : 1;
    std::cout << (o.pass ? "PASS" : "FAIL") << " [" << i + 1 << "] " << criteria[i].first
              << ": " << o.detail << std::endl;
  }
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " failed")
            << std::endl;
  return failures == 0 ? 0 : 1;
}
