#pragma once

#include <json.hpp>
#include <string>

#include "lpm/dynamics.hpp"
#include "lpm/linear_process.hpp"
#include "lpm/lp_solver.hpp"
#include "lpm/verification.hpp"

namespace lpm {

/// Machine-readable run output. The canonical section is byte-deterministic
/// for fixed inputs and tool version (keys sorted, no timestamps); wall-clock
/// timings live in the separate non-canonical section.
struct RunReport {
  nlohmann::json canonical = nlohmann::json::object();
  nlohmann::json timings = nlohmann::json::object();

  std::string canonical_dump() const;
  void write(const std::string& path) const;
};

extern const char* kToolVersion;

nlohmann::json to_json(const ProblemSpec& spec);
nlohmann::json to_json(const GridConfig& grid);
nlohmann::json to_json(const GapCertificate& cert);
nlohmann::json to_json(const SplittingCertificate& cert);
nlohmann::json to_json(const CheckReport& check);
nlohmann::json to_json(const BenchResult& bench);

void write_chart_csv(const std::string& path, const ProblemSpec& spec,
                     const ManifoldChart& chart);
void write_segment_csv(const std::string& path, const TrajectorySegment& segment);
void write_flow_csv(const std::string& path, const FlowSample& flow);
void write_evidence_csv(const std::string& path, const SplittingCertificate& cert);

}  // namespace lpm
