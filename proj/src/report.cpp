#include "lpm/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "lpm/errors.hpp"

namespace lpm {

const char* kToolVersion = "lpm 0.1.0";

using nlohmann::json;

std::string RunReport::canonical_dump() const { return canonical.dump(2); }

void RunReport::write(const std::string& path) const {
  json whole = json::object();
  whole["canonical"] = canonical;
  whole["timings"] = timings;
  std::ofstream out(path);
  if (!out) throw Error("cannot write report: " + path);
  out << whole.dump(2) << "\n";
}

json to_json(const ProblemSpec& spec) {
  json j;
  j["name"] = spec.name;
  j["n"] = spec.n;
  j["k"] = spec.k;
  j["gamma"] = spec.gamma;
  j["rho"] = spec.rho;
  j["lipschitz_l1"] = spec.L1;
  j["lipschitz_l2"] = spec.L2;
  j["ambient"] = ambient_name(spec.ambient);
  j["gamma_norm"] = spec.gamma_norm.name();
  json a = json::object();
  for (int i = 0; i < spec.n; ++i)
    for (int jj = 0; jj < spec.n; ++jj)
      if (const auto& e = spec.a(i, jj))
        a["A" + std::to_string(i + 1) + std::to_string(jj + 1)] = e->to_string();
  j["a_entries"] = a;
  json f = json::array();
  for (const auto& e : spec.f) f.push_back(e.to_string());
  j["f"] = f;
  return j;
}

json to_json(const GridConfig& grid) {
  return json{{"h", grid.h},
              {"t_window", grid.T_window},
              {"t_norm", grid.T_norm},
              {"tol_fixed_point", grid.tol_fixed_point},
              {"tail_tol", grid.tail_tol}};
}

json to_json(const GapCertificate& cert) {
  json j;
  j["gamma"] = cert.gamma;
  j["rho"] = cert.rho;
  j["L1"] = cert.L1;
  j["L2"] = cert.L2;
  j["gamma_norm"] = cert.gnorm.name();
  j["sigma_star"] = cert.sigma_star;
  j["theta_star"] = cert.theta_star;
  if (std::isfinite(cert.kappa))
    j["kappa"] = cert.kappa;
  else
    j["kappa"] = "inf";
  j["kappa_sigma"] = cert.kappa_sigma;
  j["kappa_theta"] = cert.kappa_theta;
  j["omega"] = cert.omega;
  j["inertial"] = cert.inertial;
  return j;
}

json to_json(const SplittingCertificate& cert) {
  json j;
  j["gamma"] = cert.gamma;
  j["rho"] = cert.rho;
  j["M"] = cert.M;
  j["evidence_points_stable"] = cert.evidence.stable_values.size();
  j["evidence_points_unstable"] = cert.evidence.unstable_values.size();
  return j;
}

json to_json(const CheckReport& check) {
  json j;
  j["name"] = check.name;
  j["system"] = check.system;
  j["params"] = check.params;
  j["measured"] = check.measured;
  j["bound"] = check.bound;
  j["tol_rel"] = check.tol_rel;
  j["tol_abs"] = check.tol_abs;
  j["slack"] = check.slack;
  j["pass"] = check.pass;
  j["detail"] = check.detail;
  return j;
}

json to_json(const BenchResult& bench) {
  json systems = json::array();
  for (const auto& s : bench.systems) {
    json js;
    js["system"] = s.system;
    if (s.gap) js["gap"] = to_json(*s.gap);
    if (!s.gap_error.empty()) js["gap_error"] = s.gap_error;
    json checks = json::array();
    for (const auto& c : s.checks) checks.push_back(to_json(c));
    js["checks"] = checks;
    js["scalars"] = json(s.scalars);
    js["all_pass"] = s.all_pass();
    systems.push_back(js);
  }
  return json{{"systems", systems}, {"all_pass", bench.all_pass()}};
}

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ofstream open_csv(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write CSV: " + path);
  return out;
}

}  // namespace

void write_chart_csv(const std::string& path, const ProblemSpec& spec,
                     const ManifoldChart& chart) {
  auto out = open_csv(path);
  out << "tau";
  for (int i = 1; i <= spec.k; ++i) out << ",q_" << i;
  for (int i = 1; i <= spec.dim_stable(); ++i) out << ",sigma_" << i;
  out << ",iterations,apost_error,tail_bound\n";
  for (const auto& pt : chart.points) {
    if (!pt.ok()) continue;
    out << num(chart.tau);
    for (int i = 0; i < spec.k; ++i) out << "," << num(pt.q[i]);
    for (int i = 0; i < spec.dim_stable(); ++i) out << "," << num(pt.graph[i]);
    out << "," << pt.diag.iterations << "," << num(pt.diag.apost_error) << ","
        << num(pt.diag.tail_bound) << "\n";
  }
}

void write_segment_csv(const std::string& path, const TrajectorySegment& segment) {
  auto out = open_csv(path);
  const int n = segment.states.empty() ? 0 : static_cast<int>(segment.states.front().size());
  out << "t";
  for (int i = 1; i <= n; ++i) out << ",z_" << i;
  out << "\n";
  for (std::size_t c = 0; c < segment.times.size(); ++c) {
    out << num(segment.times[c]);
    for (int i = 0; i < n; ++i) out << "," << num(segment.states[c][i]);
    out << "\n";
  }
}

void write_flow_csv(const std::string& path, const FlowSample& flow) {
  auto out = open_csv(path);
  const int n = flow.states.empty() ? 0 : static_cast<int>(flow.states.front().size());
  out << "t";
  for (int i = 1; i <= n; ++i) out << ",u_" << i;
  out << "\n";
  for (std::size_t c = 0; c < flow.times.size(); ++c) {
    out << num(flow.times[c]);
    for (int i = 0; i < n; ++i) out << "," << num(flow.states[c][i]);
    out << "\n";
  }
}

void write_evidence_csv(const std::string& path, const SplittingCertificate& cert) {
  auto out = open_csv(path);
  out << "part,t,value\n";
  for (std::size_t i = 0; i < cert.evidence.stable_times.size(); ++i)
    out << "stable," << num(cert.evidence.stable_times[i]) << ","
        << num(cert.evidence.stable_values[i]) << "\n";
  for (std::size_t i = 0; i < cert.evidence.unstable_times.size(); ++i)
    out << "unstable," << num(cert.evidence.unstable_times[i]) << ","
        << num(cert.evidence.unstable_values[i]) << "\n";
}

}  // namespace lpm
