// lpm: compute and verify invariant, inertial and stable manifolds of
// semilinear non-autonomous ODE systems by the Lyapunov-Perron method.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <iostream>

#include "lpm/benchmarks.hpp"
#include "lpm/dynamics.hpp"
#include "lpm/errors.hpp"
#include "lpm/problem_io.hpp"
#include "lpm/report.hpp"
#include "lpm/verification.hpp"

namespace {

using namespace lpm;

struct CommonArgs {
  std::string problem_path;
  std::string out_dir = ".";
  double tau = 0.0;
  double tol = -1.0;
  std::string q_range;
  std::vector<double> eta;
};

std::vector<VectorXd> parse_q_range(const std::string& text, int k) {
  if (k != 1)
    throw Error("--q start:end:step builds scalar base grids; it requires k == 1");
  double start = 0, end = 0, step = 0;
  if (std::sscanf(text.c_str(), "%lf:%lf:%lf", &start, &end, &step) != 3 || step <= 0.0)
    throw Error("--q expects start:end:step with positive step");
  std::vector<VectorXd> out;
  for (double q = start; q <= end + 1e-12; q += step) {
    VectorXd v(1);
    v[0] = q;
    out.push_back(v);
  }
  return out;
}

VectorXd parse_eta(const std::vector<double>& vals, int n) {
  if (static_cast<int>(vals.size()) != n)
    throw Error("--eta needs exactly n = " + std::to_string(n) + " components");
  VectorXd v(vals.size());
  for (std::size_t i = 0; i < vals.size(); ++i) v[i] = vals[i];
  return v;
}

Problem load(const CommonArgs& args) {
  Problem p = load_problem(args.problem_path);
  if (args.tol > 0.0) p.grid.tol_fixed_point = args.tol;
  ensure_valid(p.spec, p.grid);
  return p;
}

void start_report(RunReport& rep, const std::string& command, const Problem& p) {
  rep.canonical["tool"] = kToolVersion;
  rep.canonical["command"] = command;
  rep.canonical["problem"] = to_json(p.spec);
  rep.canonical["grid"] = to_json(p.grid);
}

std::string out_path(const CommonArgs& args, const std::string& file) {
  std::filesystem::create_directories(args.out_dir);
  return (std::filesystem::path(args.out_dir) / file).string();
}

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double sec() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
};

int cmd_check_gap(const CommonArgs& args) {
  Timer timer;
  Problem p = load(args);
  RunReport rep;
  start_report(rep, "check-gap", p);
  int code = 0;
  try {
    GapCertificate cert = make_gap_certificate(p.spec);
    rep.canonical["gap"] = to_json(cert);
  } catch (const GapFails& e) {
    rep.canonical["gap_error"] = e.what();
    std::cerr << "gap condition fails: " << e.what() << "\n";
    code = 2;
  }
  rep.timings["wall_sec"] = timer.sec();
  rep.write(out_path(args, "report.json"));
  return code;
}

int cmd_certify_splitting(const CommonArgs& args) {
  Timer timer;
  Problem p = load(args);
  RunReport rep;
  start_report(rep, "certify-splitting", p);
  int code = 0;
  try {
    LinearProcess lp =
        LinearProcess::build(p.spec, args.tau, p.grid, p.grid.T_norm, p.grid.T_norm);
    SplittingCertificate cert = certify_splitting(lp, p.spec.gamma, p.spec.rho);
    rep.canonical["splitting"] = to_json(cert);
    write_evidence_csv(out_path(args, "evidence.csv"), cert);
  } catch (const NotSplit& e) {
    rep.canonical["splitting_error"] = e.what();
    std::cerr << "splitting not certified: " << e.what() << "\n";
    code = 2;
  }
  rep.timings["wall_sec"] = timer.sec();
  rep.write(out_path(args, "report.json"));
  return code;
}

int cmd_compute_manifold(const CommonArgs& args) {
  Timer timer;
  Problem p = load(args);
  RunReport rep;
  start_report(rep, "compute-manifold", p);
  ManifoldSystem sys(p.spec, p.grid);
  rep.canonical["gap"] = to_json(sys.gap());

  std::vector<VectorXd> qs = parse_q_range(args.q_range.empty() ? "-2:2:0.5" : args.q_range,
                                           p.spec.k);
  ManifoldChart chart = sys.chart(args.tau, qs);
  write_chart_csv(out_path(args, "chart.csv"), p.spec, chart);

  nlohmann::json jc;
  jc["tau"] = chart.tau;
  jc["points"] = chart.points.size();
  jc["max_lipschitz_ratio"] = chart.max_lipschitz_ratio;
  jc["violations"] = chart.violations;
  int failures = 0;
  for (const auto& pt : chart.points)
    if (!pt.ok()) ++failures;
  jc["failed_points"] = failures;
  rep.canonical["chart"] = jc;
  rep.timings["wall_sec"] = timer.sec();
  rep.write(out_path(args, "report.json"));
  if (!chart.violations.empty()) {
    for (const auto& v : chart.violations) std::cerr << "chart invariant: " << v << "\n";
    return 2;
  }
  return failures == 0 ? 0 : 2;
}

int cmd_compute_stable(const CommonArgs& args) {
  Timer timer;
  Problem p = load(args);
  RunReport rep;
  start_report(rep, "compute-stable", p);
  ManifoldSystem sys(p.spec, p.grid);
  rep.canonical["gap"] = to_json(sys.gap());

  VectorXd eta = parse_eta(args.eta, p.spec.n);
  StableSolution sol = sys.solve_stable_point(args.tau, eta);
  write_segment_csv(out_path(args, "stable_segment.csv"), sol.segment);

  nlohmann::json js;
  js["tau"] = args.tau;
  js["theta"] = std::vector<double>(sol.graph_value.data(),
                                    sol.graph_value.data() + sol.graph_value.size());
  js["iterations"] = sol.diag.iterations;
  js["apost_error"] = sol.diag.apost_error;
  js["tail_bound"] = sol.diag.tail_bound;
  rep.canonical["stable"] = js;
  rep.timings["wall_sec"] = timer.sec();
  rep.write(out_path(args, "report.json"));
  return 0;
}

int cmd_compute_derivative(const CommonArgs& args) {
  Timer timer;
  Problem p = load(args);
  RunReport rep;
  start_report(rep, "compute-derivative", p);
  ManifoldSystem sys(p.spec, p.grid);
  rep.canonical["gap"] = to_json(sys.gap());

  VectorXd eta = parse_eta(args.eta, p.spec.n);
  DerivativeSolution sol = sys.solve_graph_derivative(args.tau, eta);

  auto out = std::ofstream(out_path(args, "dsigma.csv"));
  out << "row,col,value\n";
  for (int i = 0; i < sol.d_graph.rows(); ++i)
    for (int j = 0; j < sol.d_graph.cols(); ++j) {
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", sol.d_graph(i, j));
      out << (i + 1) << "," << (j + 1) << "," << buf << "\n";
    }

  nlohmann::json js;
  js["tau"] = args.tau;
  js["iterations"] = sol.diag.iterations;
  js["apost_error"] = sol.diag.apost_error;
  std::vector<std::vector<double>> rows;
  for (int i = 0; i < sol.d_graph.rows(); ++i)
    rows.emplace_back(sol.d_graph.row(i).data(),
                      sol.d_graph.row(i).data() + sol.d_graph.cols());
  js["d_sigma"] = rows;
  rep.canonical["derivative"] = js;
  rep.timings["wall_sec"] = timer.sec();
  rep.write(out_path(args, "report.json"));
  return 0;
}

int cmd_verify(const CommonArgs& args) {
  Timer timer;
  Problem p = load(args);
  RunReport rep;
  start_report(rep, "verify", p);
  ManifoldSystem sys(p.spec, p.grid);
  rep.canonical["gap"] = to_json(sys.gap());

  std::vector<VectorXd> qs = parse_q_range(args.q_range.empty() ? "-2:2:1" : args.q_range,
                                           p.spec.k);
  VectorXd eta_off = args.eta.empty() ? VectorXd::Ones(p.spec.n) : parse_eta(args.eta, p.spec.n);

  // declared Lipschitz constants vs the empirical probe in the moving norms
  {
    LinearProcess lp = sys.make_process(args.tau, 12.0 + p.grid.T_norm, 12.0 + p.grid.T_norm);
    NormSystem norms = process_norm_system(lp, p.spec.gamma_norm);
    LipschitzEstimate est = estimate_lipschitz(p.spec, 20000, 2.0, &norms);
    CheckReport c;
    c.name = "lipschitz-declared";
    c.system = p.spec.name;
    c.measured = std::max(est.L1_emp - p.spec.L1, est.L2_emp - p.spec.L2);
    c.bound = 0.0;
    c.detail = "empirical lower bounds: L1 >= " + std::to_string(est.L1_emp) +
               ", L2 >= " + std::to_string(est.L2_emp);
    c.finish();
    rep.canonical["lipschitz_emp"] = {{"L1", est.L1_emp}, {"L2", est.L2_emp}};
    std::fprintf(stdout, "[%s] %-16s %s\n", c.pass ? "PASS" : "FAIL", c.name.c_str(),
                 c.detail.c_str());
  }

  std::vector<CheckReport> checks;
  checks.push_back(check_invariance(sys, args.tau, 3.0, qs));
  checks.push_back(check_attraction(sys, args.tau, eta_off, 4.0));
  checks.push_back(check_lipschitz_and_cone(sys, args.tau, qs));
  checks.push_back(check_backward_growth(sys, args.tau, qs));
  checks.push_back(check_stable_decay(sys, args.tau, eta_off, 4.0));
  checks.push_back(check_c1(sys, args.tau, qs.empty() ? eta_off : [&] {
    VectorXd e = VectorXd::Zero(p.spec.n);
    e.head(p.spec.k) = qs.back();
    return e;
  }(), {0.5, 0.25, 0.1, 0.05, 0.02, 0.005}));

  nlohmann::json arr = nlohmann::json::array();
  bool all = true;
  for (const auto& c : checks) {
    arr.push_back(to_json(c));
    all = all && c.pass;
    std::fprintf(stdout, "[%s] %-16s measured %-12.5g bound %-12.5g %s\n",
                 c.pass ? "PASS" : "FAIL", c.name.c_str(), c.measured, c.bound,
                 c.detail.c_str());
  }
  rep.canonical["checks"] = arr;
  rep.canonical["all_pass"] = all;
  rep.timings["wall_sec"] = timer.sec();
  rep.write(out_path(args, "report.json"));
  return all ? 0 : 2;
}

int cmd_bench(const CommonArgs& args) {
  Timer timer;
  GridConfig grid;
  if (args.tol > 0.0) grid.tol_fixed_point = args.tol;
  BenchResult bench = run_benchmarks(grid);

  RunReport rep;
  rep.canonical["tool"] = kToolVersion;
  rep.canonical["command"] = "bench";
  rep.canonical["grid"] = to_json(grid);
  rep.canonical["bench"] = to_json(bench);
  rep.timings["wall_sec"] = timer.sec();

  std::filesystem::create_directories(args.out_dir);
  rep.write(out_path(args, "report.json"));

  for (const auto& s : bench.systems) {
    for (const auto& c : s.checks)
      std::fprintf(stdout, "[%s] %-24s %-28s measured %-12.5g bound %-12.5g\n",
                   c.pass ? "PASS" : "FAIL", s.system.c_str(), c.name.c_str(), c.measured,
                   c.bound);
  }
  return bench.all_pass() ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lyapunov-Perron manifolds for non-autonomous semilinear ODE systems"};
  app.require_subcommand(1);

  CommonArgs args;
  auto add_common = [&](CLI::App* cmd, bool needs_problem) {
    if (needs_problem)
      cmd->add_option("problem", args.problem_path, "problem file")->required();
    cmd->add_option("--out", args.out_dir, "output directory (default .)");
    cmd->add_option("--tau", args.tau, "base time (default 0)");
    cmd->add_option("--tol", args.tol, "fixed-point stopping tolerance override");
    cmd->add_option("--q", args.q_range, "base-point grid start:end:step (k = 1)");
    cmd->add_option("--eta", args.eta, "state vector v1,...,vn")->delimiter(',');
  };

  auto* c1 = app.add_subcommand("check-gap", "evaluate the gap condition and its constants");
  add_common(c1, true);
  auto* c2 = app.add_subcommand("certify-splitting",
                                "measure the exponential-splitting bound on a window");
  add_common(c2, true);
  auto* c3 = app.add_subcommand("compute-manifold", "sample the invariant graph over a q-grid");
  add_common(c3, true);
  auto* c4 = app.add_subcommand("compute-stable", "stable graph value through eta");
  add_common(c4, true);
  auto* c5 = app.add_subcommand("compute-derivative", "derivative of the graph at eta");
  add_common(c5, true);
  auto* c6 = app.add_subcommand("verify", "run the theorem checks on this problem");
  add_common(c6, true);
  auto* c7 = app.add_subcommand("bench", "run the built-in benchmark battery");
  add_common(c7, false);

  CLI11_PARSE(app, argc, argv);

  try {
    if (c1->parsed()) return cmd_check_gap(args);
    if (c2->parsed()) return cmd_certify_splitting(args);
    if (c3->parsed()) return cmd_compute_manifold(args);
    if (c4->parsed()) return cmd_compute_stable(args);
    if (c5->parsed()) return cmd_compute_derivative(args);
    if (c6->parsed()) return cmd_verify(args);
    if (c7->parsed()) return cmd_bench(args);
  } catch (const MathError& e) {
    std::cerr << "mathematical failure: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
