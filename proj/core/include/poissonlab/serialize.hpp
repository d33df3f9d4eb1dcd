#pragma once

// JSON and CSV renderings of every artifact the lab produces. Numbers use the
// shortest decimal form that round-trips to the same double, so parsing a
// written file gives back bit-identical values.

#include <span>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "poissonlab/ci_model.hpp"
#include "poissonlab/d_statistic.hpp"
#include "poissonlab/inequality_lab.hpp"
#include "poissonlab/oracle.hpp"
#include "poissonlab/sample_complexity.hpp"

namespace poissonlab {

using Json = nlohmann::ordered_json;

Json to_json(const RatioCertificate& cert);
/// Columns: lambda,a,b,numerator,denominator,ratio.
std::string certificate_csv(const RatioCertificate& cert);

Json to_json(const FalsifyResult& result);
Json to_json(const HInfimum& inf);

/// {l1, l2, n, pmf: flat row-major array, seed, metadata}.
Json to_json(const JointDistribution& joint);
JointDistribution joint_from_json(const Json& doc);
/// Columns: x,y,z,probability. Seed and metadata are not carried.
std::string joint_csv(const JointDistribution& joint);
JointDistribution joint_from_csv(std::string_view text);

Json to_json(const DStatisticModel& model);
Json to_json(const DMoments& moments);
Json to_json(const MCResult& mc);
Json to_json(const ProofChainCheck& check);
/// Columns: z,lambda_z,weight,mean_z,var_z.
std::string per_slice_csv(const DMoments& moments);

/// Columns: n,l1,l2,eps,T1a,T1b,T2,T3,T4,value,active_term,dominant_regime.
std::string complexity_csv(std::span<const ComplexityResult> rows);

Json to_json(const OracleRow& row);
std::string oracle_csv(std::span<const OracleRow> rows);

}  // namespace poissonlab
