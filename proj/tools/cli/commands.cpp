#include "commands.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <ctime>
#include <fstream>
#include <optional>
#include <stdexcept>

#include "poissonlab/ci_model.hpp"
#include "poissonlab/d_statistic.hpp"
#include "poissonlab/inequality_lab.hpp"
#include "poissonlab/numeric.hpp"
#include "poissonlab/oracle.hpp"
#include "poissonlab/poisson_core.hpp"
#include "poissonlab/random.hpp"
#include "poissonlab/sample_complexity.hpp"
#include "poissonlab/serialize.hpp"
#include "poissonlab/version.hpp"

namespace poissonlab::cli {

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Streams hanging off the root --seed for simulate-d.
enum SimulateStream : std::uint64_t { kNullStream = 0, kPerturbStream = 1, kMcStream = 2 };

constexpr double kHBandLow = 0.0109;
constexpr double kHBandHigh = 0.0129;

struct Globals {
  unsigned threads = 1;
  std::uint64_t seed = 1;
  std::string output;
  std::string format = "json";
};

struct RunContext {
  const Globals& globals;
  std::string subcommand;
  std::ostream& out;
};

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

Json metadata(const RunContext& ctx, const Json& parameters) {
  return Json{{"tool", "poissonlab"},
              {"version", kVersion},
              {"subcommand", ctx.subcommand},
              {"parameters", parameters},
              {"seed", ctx.globals.seed},
              {"format", ctx.globals.format},
              {"generated_at", utc_timestamp()}};
}

Json with_metadata(Json meta, const Json& body) {
  Json doc{{"metadata", std::move(meta)}};
  for (const auto& [k, v] : body.items()) {
    doc[k] = v;
  }
  return doc;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) {
    throw IoError("cannot open " + path + " for writing");
  }
  f << text;
  if (!f) {
    throw IoError("write to " + path + " failed");
  }
}

// JSON carries the metadata inline; CSV gets it in a PATH.meta.json sidecar.
void emit(const RunContext& ctx, const Json& parameters, const Json& body, const std::string& csv) {
  const Json meta = metadata(ctx, parameters);
  const std::string& path = ctx.globals.output;
  if (ctx.globals.format == "csv") {
    if (path.empty()) {
      ctx.out << csv;
    } else {
      write_file(path, csv);
      write_file(path + ".meta.json", meta.dump(2) + "\n");
    }
    return;
  }
  const std::string text = with_metadata(meta, body).dump(2) + "\n";
  if (path.empty()) {
    ctx.out << text;
  } else {
    write_file(path, text);
  }
}

// ---- certify ---------------------------------------------------------------

struct CertifyArgs {
  std::string which;
  std::vector<double> lambdas;
  double lambda_min = 1e-2;
  double lambda_max = 1e4;
  int lambda_count = 25;
  bool range_given = false;
  std::vector<double> caps;
  double tol = kDefaultTolerance;
};

int cmd_certify(const RunContext& ctx, const CertifyArgs& a) {
  const RatioKind kind = ratio_kind_from_string(a.which);
  GridSpec grid = GridSpec::default_for(kind);
  if (!a.lambdas.empty()) {
    if (a.range_given) {
      throw UsageError("--lambda cannot be combined with --lambda-min/--lambda-max/--lambda-count");
    }
    grid.lambda_points = a.lambdas;
  } else if (a.range_given) {
    grid.lambda_points = log_spaced(a.lambda_min, a.lambda_max, a.lambda_count);
  }
  if (!a.caps.empty()) {
    if (kind == RatioKind::claim21) {
      throw UsageError("certify claim21 takes no --caps");
    }
    grid.cap_pairs = cap_pairs_from(a.caps);
  }
  grid.tol = a.tol;
  grid.validate();

  const RatioCertificate cert = sweep(grid, kind, ctx.globals.threads);
  Json body = to_json(cert);

  bool holds = false;
  switch (kind) {
    case RatioKind::claim21:
      holds = !cert.records.empty() && std::isfinite(cert.sup_ratio);
      break;
    case RatioKind::claim23:
      holds = !cert.records.empty() && cert.inf_ratio > 0.0;
      break;
    default: {
      holds = cert.records.empty() || std::isfinite(cert.sup_ratio);
      Json plateau = Json::array();
      for (const PlateauCheck& p : plateau_checks(cert)) {
        holds = holds && p.holds;
        plateau.push_back({{"a", p.a},
                           {"b", p.b},
                           {"ratio_low", p.ratio_low},
                           {"ratio_high", p.ratio_high},
                           {"relative_change", p.relative_change},
                           {"holds", p.holds}});
      }
      body["plateau"] = std::move(plateau);
    }
  }
  body["predicate_holds"] = holds;

  Json pairs = Json::array();
  for (const auto& [ca, cb] : grid.cap_pairs) {
    pairs.push_back(Json::array({ca, cb}));
  }
  const Json params{{"which", a.which},
                    {"lambda", grid.lambda_points},
                    {"cap_pairs", std::move(pairs)},
                    {"tol", grid.tol}};
  emit(ctx, params, body, certificate_csv(cert));
  if (!cert.failures.empty()) {
    return kExitInternal;
  }
  return holds ? kExitOk : kExitPredicateFailed;
}

// ---- falsify ---------------------------------------------------------------

int cmd_falsify(const RunContext& ctx, double target, double tol) {
  if (!(target > 0.0) || !std::isfinite(target)) {
    throw UsageError("--target must be a positive finite number");
  }
  const FalsifyResult result = falsify_original_claim(target, tol);
  std::string csv = "k,lambda,a,b,ratio,error_bound\n";
  for (const FalsifyStep& s : result.schedule) {
    csv += std::to_string(s.k) + ',' + format_double(s.lambda) + ',' + std::to_string(s.k) + ',' +
           std::to_string(s.k) + ',' + format_double(s.ratio) + ',' +
           format_double(s.error_bound) + '\n';
  }
  emit(ctx, Json{{"target", target}, {"tol", tol}}, to_json(result), csv);
  return result.found ? kExitOk : kExitPredicateFailed;
}

// ---- simulate-d ------------------------------------------------------------

struct SimulateArgs {
  int l1 = 4;
  int l2 = 4;
  int n = 50;
  double m = 1000.0;
  double magnitude = 0.5;
  std::int64_t reps = 100'000;
  double tol = kDefaultTolerance;
};

int cmd_simulate_d(const RunContext& ctx, const SimulateArgs& a) {
  if (a.reps < 2) {
    throw UsageError("--reps must be at least 2");
  }
  if (!(a.magnitude >= 0.0) || a.magnitude > 1.0) {
    throw UsageError("--magnitude must lie in [0, 1]");
  }
  if (!(a.m > 0.0) || !std::isfinite(a.m)) {
    throw UsageError("--m must be positive");
  }
  const std::uint64_t seed = ctx.globals.seed;
  const JointDistribution null = generate_null(a.l1, a.l2, a.n, derive_seed(seed, {kNullStream}));

  Json perturbation{{"magnitude", a.magnitude}};
  std::optional<PerturbResult> perturbed;
  if (a.magnitude > 0.0) {
    perturbed = perturb(null, a.magnitude, derive_seed(seed, {kPerturbStream}));
    perturbation["clipped"] = perturbed->clipped;
    perturbation["eps"] = perturbed->eps;
  } else {
    perturbation["clipped"] = false;
    perturbation["note"] = "magnitude 0: null model left unperturbed";
  }
  const JointDistribution& joint = perturbed ? perturbed->joint : null;

  const DStatisticModel model = build_d_model(joint, a.m);
  const DMoments exact = exact_moments(model, a.tol, ctx.globals.threads);
  const MCResult mc = mc_moments(model, a.reps, derive_seed(seed, {kMcStream}), ctx.globals.threads);
  const std::optional<double> ratio = lemma2_ratio(exact);
  const ProofChainCheck chain = proof_chain(model, exact);
  const bool agrees = mc_agrees(mc, exact);

  Json chain_json = to_json(chain);
  chain_json["holds"] = chain.holds();
  Json body{{"joint", to_json(joint)},
            {"perturbation", std::move(perturbation)},
            {"model", to_json(model)},
            {"exact", to_json(exact)},
            {"mc", to_json(mc)},
            {"mc_agrees", agrees},
            {"lemma2_ratio", ratio ? Json(*ratio) : Json(nullptr)},
            {"proof_chain", std::move(chain_json)}};
  if (!ratio) {
    body["lemma2_ratio_note"] = "skipped: E[D] below denominator floor";
  }

  const Json params{{"l1", a.l1},   {"l2", a.l2},     {"n", a.n},
                    {"m", a.m},     {"magnitude", a.magnitude},
                    {"reps", a.reps}, {"tol", a.tol}};
  const std::string csv = per_slice_csv(exact);
  if (ctx.globals.output.empty()) {
    emit(ctx, params, body, csv);
  } else {
    const std::string& prefix = ctx.globals.output;
    write_file(prefix + ".json", with_metadata(metadata(ctx, params), body).dump(2) + "\n");
    write_file(prefix + ".csv", csv);
  }
  return agrees && chain.second_step && chain.first_step ? kExitOk : kExitPredicateFailed;
}

// ---- complexity ------------------------------------------------------------

struct ComplexityArgs {
  double n = 1e6;
  double l1 = 2.0;
  double l2 = 2.0;
  double eps = 0.1;
  std::vector<double> n_range;
  std::vector<double> eps_range;
  bool both_orderings = false;
};

LogRange parse_range(const std::vector<double>& v, double single, const char* flag) {
  if (v.empty()) {
    return {single, single, 1};
  }
  if (v.size() != 3 || !(v[2] >= 1.0) || v[2] != std::floor(v[2])) {
    throw UsageError(std::string(flag) + " expects LO,HI,COUNT with integer COUNT >= 1");
  }
  return {v[0], v[1], static_cast<int>(v[2])};
}

Json complexity_row(const ComplexityResult& r) {
  Json terms = Json::object();
  for (int t = 0; t < 5; ++t) {
    terms[to_string(static_cast<ComplexityTerm>(t))] = r.terms[static_cast<std::size_t>(t)];
  }
  return Json{{"n", r.inputs.n},       {"l1", r.inputs.l1},
              {"l2", r.inputs.l2},     {"eps", r.inputs.eps},
              {"terms", std::move(terms)}, {"value", r.value},
              {"active_term", to_string(r.active_term)},
              {"dominant_regime", to_string(r.dominant_regime)}};
}

int cmd_complexity(const RunContext& ctx, const ComplexityArgs& a) {
  std::vector<ComplexityResult> rows;
  if (a.n_range.empty() && a.eps_range.empty()) {
    const ComplexityInputs in{a.n, a.l1, a.l2, a.eps};
    rows.push_back(a.both_orderings ? evaluate_min_ordering(in) : evaluate(in));
  } else {
    const LogRange nr = parse_range(a.n_range, a.n, "--n-range");
    const LogRange er = parse_range(a.eps_range, a.eps, "--eps-range");
    rows = regime_map(nr, a.l1, a.l2, er, a.both_orderings);
  }
  Json list = Json::array();
  for (const ComplexityResult& r : rows) {
    list.push_back(complexity_row(r));
  }
  const Json body{{"note", "values are up to constants"}, {"rows", std::move(list)}};
  Json params{{"n", a.n}, {"l1", a.l1}, {"l2", a.l2}, {"eps", a.eps},
              {"both_orderings", a.both_orderings}};
  if (!a.n_range.empty()) params["n_range"] = a.n_range;
  if (!a.eps_range.empty()) params["eps_range"] = a.eps_range;
  emit(ctx, params, body, complexity_csv(rows));
  return kExitOk;
}

// ---- h ---------------------------------------------------------------------

int cmd_h(const RunContext& ctx, double lambda_max, int grid) {
  const HInfimum inf = h_infimum(lambda_max, grid);
  const bool in_band = inf.value >= kHBandLow && inf.value <= kHBandHigh;
  Json body = to_json(inf);
  body["band"] = Json::array({kHBandLow, kHBandHigh});
  body["in_band"] = in_band;
  const std::string csv = "lambda_max,grid_points,inf,arg_lambda,tail_certified,in_band\n" +
                          format_double(inf.lambda_max) + ',' + std::to_string(inf.grid_points) +
                          ',' + format_double(inf.value) + ',' + format_double(inf.arg_lambda) +
                          ',' + (inf.tail_certified ? "true" : "false") + ',' +
                          (in_band ? "true" : "false") + '\n';
  emit(ctx, Json{{"lambda_max", lambda_max}, {"grid", grid}}, body, csv);
  return in_band ? kExitOk : kExitPredicateFailed;
}

// ---- oracle-check ----------------------------------------------------------

int cmd_oracle_check(const RunContext& ctx, std::int64_t draws, double tol) {
  if (draws < 2) {
    throw UsageError("--draws must be at least 2");
  }
  std::vector<OracleRow> rows;
  bool all = true;
  Json list = Json::array();
  const std::vector<GridPoint> points = pinned_oracle_points();
  for (std::size_t i = 0; i < points.size(); ++i) {
    rows.push_back(oracle_check(points[i], draws,
                                derive_seed(ctx.globals.seed, {static_cast<std::uint64_t>(i)}), 4.0,
                                tol, ctx.globals.threads));
    all = all && rows.back().passed();
    list.push_back(to_json(rows.back()));
  }
  const Json body{{"all_passed", all}, {"points", std::move(list)}};
  emit(ctx, Json{{"draws", draws}, {"tol", tol}}, body, oracle_csv(rows));
  return all ? kExitOk : kExitPredicateFailed;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Certified moment computations for capped Poisson functionals", "poissonlab"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  Globals g;
  app.add_option("--threads", g.threads, "Worker threads (0 = all cores)")->capture_default_str();
  app.add_option("--seed", g.seed, "Root seed for all randomness")->capture_default_str();
  app.add_option("--output", g.output, "Output path (simulate-d: prefix)");
  app.add_option("--format", g.format, "Output format")
      ->check(CLI::IsMember({"json", "csv"}))
      ->capture_default_str();

  CertifyArgs certify;
  auto* c = app.add_subcommand("certify", "Sweep a ratio over a (lambda, a, b) grid");
  c->fallthrough();
  c->add_option("which", certify.which, "lemma1 | claim21 | claim23")
      ->required()
      ->check(CLI::IsMember({"lemma1", "claim21", "claim23"}));
  c->add_option("--lambda", certify.lambdas, "Explicit lambda points")->delimiter(',');
  auto* lmin = c->add_option("--lambda-min", certify.lambda_min)->capture_default_str();
  auto* lmax = c->add_option("--lambda-max", certify.lambda_max)->capture_default_str();
  auto* lcount = c->add_option("--lambda-count", certify.lambda_count)->capture_default_str();
  c->add_option("--caps", certify.caps, "Cap values; all pairs a <= b are swept")->delimiter(',');
  c->add_option("--tol", certify.tol)->capture_default_str();

  double target = 0.0;
  double falsify_tol = kDefaultTolerance;
  auto* f = app.add_subcommand("falsify", "Search a = b = k, lambda = 100 k^2 for a large ratio");
  f->fallthrough();
  f->add_option("--target", target, "Ratio to exceed")->required();
  f->add_option("--tol", falsify_tol)->capture_default_str();

  SimulateArgs sim;
  auto* s = app.add_subcommand("simulate-d", "Exact and Monte Carlo moments of D");
  s->fallthrough();
  s->add_option("--l1", sim.l1)->capture_default_str();
  s->add_option("--l2", sim.l2)->capture_default_str();
  s->add_option("--n", sim.n)->capture_default_str();
  s->add_option("--m", sim.m, "Expected sample size")->capture_default_str();
  s->add_option("--magnitude", sim.magnitude, "Perturbation size in [0, 1]")->capture_default_str();
  s->add_option("--reps", sim.reps, "Monte Carlo replications")->capture_default_str();
  s->add_option("--tol", sim.tol)->capture_default_str();

  ComplexityArgs cx;
  auto* x = app.add_subcommand("complexity", "Evaluate the sample complexity expression");
  x->fallthrough();
  x->add_option("--n", cx.n)->capture_default_str();
  x->add_option("--l1", cx.l1)->capture_default_str();
  x->add_option("--l2", cx.l2)->capture_default_str();
  x->add_option("--eps", cx.eps)->capture_default_str();
  x->add_option("--n-range", cx.n_range, "LO,HI,COUNT (log-spaced)")->delimiter(',');
  x->add_option("--eps-range", cx.eps_range, "LO,HI,COUNT (log-spaced)")->delimiter(',');
  x->add_flag("--both-orderings", cx.both_orderings, "Minimum over (l1, l2) and (l2, l1)");

  double h_lambda_max = kHDefaultLambdaMax;
  int h_grid = kHDefaultGridPoints;
  auto* h = app.add_subcommand("h", "Infimum of h over lambda >= 1");
  h->fallthrough();
  h->add_option("--lambda-max", h_lambda_max)->capture_default_str();
  h->add_option("--grid", h_grid)->capture_default_str();

  std::int64_t draws = 1'000'000;
  double oracle_tol = kDefaultTolerance;
  auto* o = app.add_subcommand("oracle-check", "Series vs pairwise and Monte Carlo oracles");
  o->fallthrough();
  o->add_option("--draws", draws)->capture_default_str();
  o->add_option("--tol", oracle_tol)->capture_default_str();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }
  g.threads = resolve_threads(g.threads);

  CLI::App* active = app.get_subcommands().front();
  const RunContext ctx{g, active->get_name(), out};
  try {
    if (active == c) {
      certify.range_given = lmin->count() + lmax->count() + lcount->count() > 0;
      return cmd_certify(ctx, certify);
    }
    if (active == f) return cmd_falsify(ctx, target, falsify_tol);
    if (active == s) return cmd_simulate_d(ctx, sim);
    if (active == x) return cmd_complexity(ctx, cx);
    if (active == h) return cmd_h(ctx, h_lambda_max, h_grid);
    return cmd_oracle_check(ctx, draws, oracle_tol);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kExitUsage;
  } catch (const std::domain_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
}

}  // namespace poissonlab::cli
