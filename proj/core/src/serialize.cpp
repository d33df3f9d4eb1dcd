#include "poissonlab/serialize.hpp"

#include <charconv>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "poissonlab/numeric.hpp"

namespace poissonlab {

namespace {

// Non-finite values have no JSON literal; they are written as null.
Json number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json point_json(const GridPoint& p) {
  return Json{{"lambda", number(p.lambda)}, {"a", number(p.a)}, {"b", number(p.b)}};
}

double parse_double(std::string_view field) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw std::invalid_argument("csv: bad number '" + std::string(field) + "'");
  }
  return value;
}

int parse_index(std::string_view field) {
  int value = 0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size() || value < 0) {
    throw std::invalid_argument("csv: bad index '" + std::string(field) + "'");
  }
  return value;
}

}  // namespace

Json to_json(const RatioCertificate& cert) {
  Json records = Json::array();
  for (const RatioRecord& r : cert.records) {
    records.push_back({{"lambda", number(r.point.lambda)},
                       {"a", number(r.point.a)},
                       {"b", number(r.point.b)},
                       {"numerator", number(r.numerator)},
                       {"denominator", number(r.denominator)},
                       {"ratio", number(r.ratio)}});
  }
  Json skipped = Json::array();
  for (const GridPoint& p : cert.skipped) {
    skipped.push_back(point_json(p));
  }
  Json failures = Json::array();
  for (const PointFailure& f : cert.failures) {
    Json entry = point_json(f.point);
    entry["message"] = f.message;
    failures.push_back(std::move(entry));
  }
  Json summary{{"kind", to_string(cert.kind)},
               {"tol", cert.tol},
               {"record_count", cert.records.size()},
               {"sup_ratio", number(cert.sup_ratio)},
               {"inf_ratio", number(cert.inf_ratio)},
               {"arg_sup", cert.records.empty() ? Json(nullptr) : point_json(cert.arg_sup)},
               {"arg_inf", cert.records.empty() ? Json(nullptr) : point_json(cert.arg_inf)},
               {"skipped_count", cert.skipped.size()},
               {"failure_count", cert.failures.size()}};
  return Json{{"summary", std::move(summary)},
              {"records", std::move(records)},
              {"skipped", std::move(skipped)},
              {"failures", std::move(failures)}};
}

std::string certificate_csv(const RatioCertificate& cert) {
  std::string out = "lambda,a,b,numerator,denominator,ratio\n";
  for (const RatioRecord& r : cert.records) {
    out += format_double(r.point.lambda) + ',' + format_double(r.point.a) + ',' +
           format_double(r.point.b) + ',' + format_double(r.numerator) + ',' +
           format_double(r.denominator) + ',' + format_double(r.ratio) + '\n';
  }
  return out;
}

Json to_json(const FalsifyResult& result) {
  auto step_json = [](const FalsifyStep& s) {
    return Json{{"k", s.k},
                {"lambda", number(s.lambda)},
                {"a", static_cast<double>(s.k)},
                {"b", static_cast<double>(s.k)},
                {"ratio", number(s.ratio)},
                {"error_bound", number(s.error_bound)}};
  };
  Json schedule = Json::array();
  for (const FalsifyStep& s : result.schedule) {
    schedule.push_back(step_json(s));
  }
  return Json{{"target", result.target},
              {"found", result.found},
              {"witness", result.schedule.empty() ? Json(nullptr) : step_json(result.witness)},
              {"ratio_doubles", ratio_doubles_along_schedule(result)},
              {"stop_reason", result.stop_reason},
              {"schedule", std::move(schedule)}};
}

Json to_json(const HInfimum& inf) {
  return Json{{"inf", number(inf.value)},
              {"arg_lambda", number(inf.arg_lambda)},
              {"lambda_max", inf.lambda_max},
              {"grid_points", inf.grid_points},
              {"tail_certified", inf.tail_certified}};
}

Json to_json(const JointDistribution& joint) {
  Json metadata = Json::object();
  for (const auto& [k, v] : joint.metadata()) {
    metadata[k] = v;
  }
  return Json{{"l1", joint.l1()},
              {"l2", joint.l2()},
              {"n", joint.n()},
              {"pmf", joint.pmf()},
              {"seed", joint.seed()},
              {"metadata", std::move(metadata)}};
}

JointDistribution joint_from_json(const Json& doc) {
  std::map<std::string, std::string> metadata;
  if (doc.contains("metadata")) {
    for (const auto& [k, v] : doc.at("metadata").items()) {
      metadata[k] = v.get<std::string>();
    }
  }
  return JointDistribution(doc.at("l1").get<int>(), doc.at("l2").get<int>(),
                           doc.at("n").get<int>(), doc.at("pmf").get<std::vector<double>>(),
                           doc.value("seed", std::uint64_t{0}), std::move(metadata));
}

std::string joint_csv(const JointDistribution& joint) {
  std::string out = "x,y,z,probability\n";
  for (int x = 0; x < joint.l1(); ++x) {
    for (int y = 0; y < joint.l2(); ++y) {
      for (int z = 0; z < joint.n(); ++z) {
        out += std::to_string(x) + ',' + std::to_string(y) + ',' + std::to_string(z) + ',' +
               format_double(joint.at(x, y, z)) + '\n';
      }
    }
  }
  return out;
}

JointDistribution joint_from_csv(std::string_view text) {
  struct Row {
    int x, y, z;
    double p;
  };
  std::vector<Row> rows;
  int l1 = 0;
  int l2 = 0;
  int n = 0;
  bool header = true;
  while (!text.empty()) {
    const auto eol = text.find('\n');
    std::string_view line = text.substr(0, eol);
    text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (header) {
      if (line != "x,y,z,probability") {
        throw std::invalid_argument("csv: expected header x,y,z,probability");
      }
      header = false;
      continue;
    }
    std::string_view fields[4];
    for (int i = 0; i < 4; ++i) {
      const auto comma = line.find(',');
      if ((i < 3) == (comma == std::string_view::npos)) {
        throw std::invalid_argument("csv: expected four fields per row");
      }
      fields[i] = line.substr(0, comma);
      line = i < 3 ? line.substr(comma + 1) : std::string_view{};
    }
    Row r{parse_index(fields[0]), parse_index(fields[1]), parse_index(fields[2]),
          parse_double(fields[3])};
    l1 = std::max(l1, r.x + 1);
    l2 = std::max(l2, r.y + 1);
    n = std::max(n, r.z + 1);
    rows.push_back(r);
  }
  const auto cells = static_cast<std::size_t>(l1) * static_cast<std::size_t>(l2) *
                     static_cast<std::size_t>(n);
  if (rows.size() != cells) {
    throw std::invalid_argument("csv: table is not a full l1 x l2 x n grid");
  }
  std::vector<double> pmf(cells, 0.0);
  std::vector<bool> seen(cells, false);
  for (const Row& r : rows) {
    const auto i = (static_cast<std::size_t>(r.x) * static_cast<std::size_t>(l2) +
                    static_cast<std::size_t>(r.y)) *
                       static_cast<std::size_t>(n) +
                   static_cast<std::size_t>(r.z);
    if (seen[i]) {
      throw std::invalid_argument("csv: duplicate cell");
    }
    seen[i] = true;
    pmf[i] = r.p;
  }
  return JointDistribution(l1, l2, n, std::move(pmf));
}

Json to_json(const DStatisticModel& model) {
  return Json{{"n", model.n},
              {"rates", model.rates},
              {"weights", model.weights},
              {"cap_a", model.cap_a},
              {"cap_b", model.cap_b},
              {"threshold", model.threshold}};
}

Json to_json(const DMoments& moments) {
  Json per_z = Json::array();
  for (const SliceMoments& s : moments.per_z) {
    per_z.push_back({{"z", s.z},
                     {"lambda_z", s.rate},
                     {"weight", s.weight},
                     {"mean_z", s.mean},
                     {"var_z", s.variance}});
  }
  return Json{{"mean", moments.mean},
              {"variance", moments.variance},
              {"tail_bound", moments.tail_bound},
              {"per_z", std::move(per_z)}};
}

Json to_json(const MCResult& mc) {
  return Json{{"replications", mc.replications}, {"mean_hat", mc.mean_hat},
              {"var_hat", mc.var_hat},           {"se_mean", mc.se_mean},
              {"se_var", mc.se_var},             {"seed", mc.seed}};
}

Json to_json(const ProofChainCheck& check) {
  return Json{{"variance", check.variance},
              {"scaled_mean", check.scaled_mean},
              {"mean", check.mean},
              {"observed_c1", check.observed_c1},
              {"slice_ratio_bound", check.slice_ratio_bound},
              {"first_step", check.first_step},
              {"second_step", check.second_step}};
}

std::string per_slice_csv(const DMoments& moments) {
  std::string out = "z,lambda_z,weight,mean_z,var_z\n";
  for (const SliceMoments& s : moments.per_z) {
    out += std::to_string(s.z) + ',' + format_double(s.rate) + ',' + format_double(s.weight) +
           ',' + format_double(s.mean) + ',' + format_double(s.variance) + '\n';
  }
  return out;
}

std::string complexity_csv(std::span<const ComplexityResult> rows) {
  std::string out = "n,l1,l2,eps,T1a,T1b,T2,T3,T4,value,active_term,dominant_regime\n";
  for (const ComplexityResult& r : rows) {
    out += format_double(r.inputs.n) + ',' + format_double(r.inputs.l1) + ',' +
           format_double(r.inputs.l2) + ',' + format_double(r.inputs.eps);
    for (const double t : r.terms) {
      out += ',' + format_double(t);
    }
    out += ',' + format_double(r.value) + ',' + to_string(r.active_term) + ',' +
           to_string(r.dominant_regime) + '\n';
  }
  return out;
}

Json to_json(const OracleRow& row) {
  return Json{{"lambda", number(row.point.lambda)},
              {"a", number(row.point.a)},
              {"b", number(row.point.b)},
              {"mean", row.mean},
              {"mean_error", row.mean_error},
              {"variance", row.variance},
              {"variance_error", row.variance_error},
              {"pairwise", row.pairwise},
              {"pairwise_error", row.pairwise_error},
              {"draws", row.draws},
              {"mc_mean", row.mc_mean},
              {"mc_variance", row.mc_variance},
              {"se_mean", row.se_mean},
              {"se_variance", row.se_variance},
              {"pairwise_agrees", row.pairwise_agrees},
              {"mc_mean_agrees", row.mc_mean_agrees},
              {"mc_variance_agrees", row.mc_variance_agrees}};
}

std::string oracle_csv(std::span<const OracleRow> rows) {
  std::string out =
      "lambda,a,b,mean,variance,pairwise,mc_mean,mc_variance,se_mean,se_variance,passed\n";
  for (const OracleRow& r : rows) {
    out += format_double(r.point.lambda) + ',' + format_double(r.point.a) + ',' +
           format_double(r.point.b) + ',' + format_double(r.mean) + ',' +
           format_double(r.variance) + ',' + format_double(r.pairwise) + ',' +
           format_double(r.mc_mean) + ',' + format_double(r.mc_variance) + ',' +
           format_double(r.se_mean) + ',' + format_double(r.se_variance) + ',' +
           (r.passed() ? "true" : "false") + '\n';
  }
  return out;
}

}  // namespace poissonlab
