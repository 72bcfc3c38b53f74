// Acceptance suite: runs every acceptance criterion at its stated tolerance
// and prints one pass/fail line per criterion. Exit code 0 iff all pass.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "lpm/benchmarks.hpp"
#include "lpm/errors.hpp"
#include "lpm/report.hpp"
#include "lpm/verification.hpp"

using namespace lpm;

namespace {

struct Outcome {
  bool pass = true;
  std::string note;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      note += (note.empty() ? "" : "; ") + what;
    }
  }
};

int failures = 0;

void report(int id, const char* name, const Outcome& o) {
  std::printf("[%s] criterion %d: %s%s%s\n", o.pass ? "PASS" : "FAIL", id, name,
              o.note.empty() ? "" : " -- ", o.note.c_str());
  if (!o.pass) ++failures;
}

double max_ratio(const SolveDiagnostics& d) {
  double m = 0.0;
  for (double r : d.ratios) m = std::max(m, r);
  return m;
}

VectorXd vec2(double a, double b) {
  VectorXd v(2);
  v << a, b;
  return v;
}

std::vector<VectorXd> scalar_points(std::initializer_list<double> qs) {
  std::vector<VectorXd> out;
  for (double q : qs) {
    VectorXd v(1);
    v[0] = q;
    out.push_back(v);
  }
  return out;
}

struct SolveRecord {
  std::string label;
  double ratio_excess;  // max ratio - (theta* + 0.05)
};

std::vector<SolveRecord> solve_log;

void log_solve(const std::string& label, const SolveDiagnostics& d, double theta) {
  solve_log.push_back({label, max_ratio(d) - (theta + 0.05)});
}

char buf[256];

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

}  // namespace

int main() {
  const auto t_suite = std::chrono::steady_clock::now();
  GridConfig grid;  // T = 40, h = 0.01, the configuration the tolerances are stated at

  double rot06_err = 0.0, rot06_apost = 1.0;
  double tanh_err = 0.0, tanh_apost = 1.0;

  // ---- criterion 1: sharp-gap benchmark ------------------------------------
  {
    Outcome o;
    for (double eps : {0.2, 0.5, 0.6, 0.9}) {
      ManifoldSystem sys(bench::rotgap(eps), grid);
      auto t0 = std::chrono::steady_clock::now();
      UnstableSolution sol = sys.solve_graph_point(0.0, vec2(1.0, 0.0));
      double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      double expected = bench::rotgap_slope(eps);
      double err = std::abs(sol.graph_value[0] - expected);
      double tol = eps <= 0.6 ? 1e-4 : 1e-3;
      o.require(err <= tol, fmt("slope error %.3g at eps=%.2g", err, eps));
      o.require(sec < 5.0, fmt("solve took %.2f s", sec));
      log_solve("rotgap", sol.diag, sys.gap().theta_star);
      if (eps == 0.6) {
        rot06_err = err;
        rot06_apost = sol.diag.apost_error;
      }
    }
    bool gap_failed = false;
    try {
      make_gap_certificate(bench::rotgap(1.0));
    } catch (const GapFails&) {
      gap_failed = true;
    }
    o.require(gap_failed, "rotgap(1.0) did not raise GapFails");
    report(1, "sharp-gap benchmark slopes and the eps = 1 failure case", o);
  }

  // ---- criterion 2: closed-form constants ----------------------------------
  {
    Outcome o;
    const AdmissibleNorm mx = AdmissibleNorm::max_norm();
    const AdmissibleNorm one = AdmissibleNorm::p_norm(1.0);

    double ks_max = refine_kappa_sigma(2.0, -2.0, 1.0, 1.0, mx);
    o.require(std::abs(ks_max - 1.0 / (2.0 - (-2.0) - 1.0)) <= 1e-12,
              fmt("max-norm kappa_sigma off by %.3g", std::abs(ks_max - 1.0 / 3.0)));

    double ks_one = refine_kappa_sigma(3.0, -2.0, 1.0, 1.0, one);
    double ks_exact = 2.0 / (3.0 + std::sqrt(5.0));
    o.require(std::abs(ks_one - ks_exact) <= 1e-12,
              fmt("1-norm kappa_sigma off by %.3g", std::abs(ks_one - ks_exact)));
    o.require(std::abs(ks_exact - 0.3819660113) <= 1e-9, "quoted digits drifted");

    double w1 = omega_rate(2.0, -2.0, 1.0, 1.0, ks_max, mx);
    o.require(std::abs(w1 - 2.0 / 3.0) <= 1e-12, fmt("omega 2/3 off by %.3g", std::abs(w1 - 2.0 / 3.0)));
    double ks_rot = refine_kappa_sigma(1.0, -1.0, 0.6, 0.6, mx);
    double w2 = omega_rate(1.0, -1.0, 0.6, 0.6, ks_rot, mx);
    o.require(std::abs(w2 - 1.0 / 7.0) <= 1e-12, fmt("omega 1/7 off by %.3g", std::abs(w2 - 1.0 / 7.0)));
    double w3 = omega_rate(3.0, -2.0, 1.0, 1.0, ks_one, one);
    double golden = (1.0 + std::sqrt(5.0)) / 2.0;
    o.require(std::abs(w3 - golden) <= 1e-12, fmt("golden omega off by %.3g", std::abs(w3 - golden)));
    o.require(std::abs(golden - 1.6180339887) <= 1e-9, "quoted golden digits drifted");
    report(2, "closed-form kappa_sigma and omega constants at 1e-12", o);
  }

  // ---- criterion 3: analytic nonlinear graph -------------------------------
  {
    Outcome o;
    ManifoldSystem sys(bench::tanhline(0.5), grid);
    for (double q : {0.5, 1.0, 2.0}) {
      UnstableSolution sol = sys.solve_graph_point(0.0, vec2(q, 0.0));
      double err = std::abs(sol.graph_value[0] - bench::tanhline_graph(0.5, q));
      o.require(err <= 1e-4, fmt("graph error %.3g at q=%.2g", err, q));
      log_solve("tanhline", sol.diag, sys.gap().theta_star);
      if (q == 1.0) {
        tanh_err = err;
        tanh_apost = sol.diag.apost_error;
      }
    }
    DerivativeSolution der = sys.solve_graph_derivative(0.0, vec2(1.0, 0.0));
    log_solve("tanhline-derivative", der.diag, sys.gap().theta_star);
    o.require(std::abs(der.d_graph(0, 0) - 0.1639000134) <= 1e-4,
              fmt("derivative %.8f vs quoted 0.1639000134", der.d_graph(0, 0)));
    o.require(std::abs(der.d_graph(0, 0) - bench::tanhline_slope(0.5, 1.0)) <= 1e-4,
              "derivative misses the analytic slope");
    report(3, "tanhline graph and derivative against the analytic solution", o);
  }

  // ---- criterion 4: contraction certificate --------------------------------
  {
    Outcome o;
    for (const auto& rec : solve_log)
      o.require(rec.ratio_excess <= 0.0,
                rec.label + fmt(" ratio excess %.3g", rec.ratio_excess));
    o.require(rot06_err <= rot06_apost,
              fmt("rotgap(0.6): true error %.3g above the reported bound %.3g", rot06_err,
                  rot06_apost));
    o.require(tanh_err <= tanh_apost,
              fmt("tanhline: true error %.3g above the reported bound %.3g", tanh_err,
                  tanh_apost));
    report(4, "increment ratios below theta*+0.05 and a-posteriori bounds dominate", o);
  }

  // ---- criterion 5: theorem inequalities -----------------------------------
  {
    Outcome o;
    {
      ManifoldSystem sys(bench::rotgap(0.6), grid);
      CheckReport c;
      c = check_invariance(sys, 0.0, 5.0, scalar_points({-1.0, 1.0}));
      o.require(c.pass, "rotgap invariance: " + c.detail);
      c = check_attraction(sys, 0.0, vec2(0.0, 1.0), 5.0);
      o.require(c.pass, "rotgap attraction: " + c.detail);
      c = check_lipschitz_and_cone(sys, 0.0, scalar_points({-2.0, -1.0, 1.0, 2.0}));
      o.require(c.pass, "rotgap lipschitz/cone: " + c.detail);
      c = check_backward_growth(sys, 0.0, scalar_points({-1.0, 1.0}));
      o.require(c.pass, "rotgap backward growth: " + c.detail);
      c = check_stable_decay(sys, 0.0, vec2(0.0, 1.0), 5.0);
      o.require(c.pass, "rotgap stable decay: " + c.detail);
    }
    {
      ManifoldSystem sys(bench::tanhline(0.5), grid);
      CheckReport c;
      c = check_invariance(sys, 0.0, 5.0, scalar_points({1.0}));
      o.require(c.pass, "tanhline invariance: " + c.detail);
      c = check_attraction(sys, 0.0, vec2(1.0, 1.0), 5.0);
      o.require(c.pass, "tanhline attraction: " + c.detail);
      c = check_lipschitz_and_cone(sys, 0.0, scalar_points({-2.0, -0.5, 0.5, 1.0, 2.0}));
      o.require(c.pass, "tanhline lipschitz: " + c.detail);
      c = check_backward_growth(sys, 0.0, scalar_points({1.0}));
      o.require(c.pass, "tanhline backward growth: " + c.detail);
      c = check_stable_decay(sys, 0.0, vec2(3.0, 1.0), 5.0);
      o.require(c.pass, "tanhline stable decay: " + c.detail);
    }
    report(5, "theorem inequalities hold with zero violations on the sampled grids", o);
  }

  // ---- criterion 6: derivative correctness ---------------------------------
  {
    Outcome o;
    for (auto spec : {bench::rotgap(0.6), bench::tanhline(0.5)}) {
      ManifoldSystem sys(spec, grid);
      LinearProcess lp = sys.make_process(0.0);
      const double dq = 1e-4;
      UnstableSolution base = solve_unstable(spec, lp, sys.gap(), 0.0, vec2(1.0, 0.0), grid);
      DerivativeSolution der = solve_derivative(spec, lp, sys.gap(), 0.0, grid, base.segment);
      UnstableSolution up = solve_unstable(spec, lp, sys.gap(), 0.0, vec2(1.0 + dq, 0.0), grid);
      UnstableSolution dn = solve_unstable(spec, lp, sys.gap(), 0.0, vec2(1.0 - dq, 0.0), grid);
      double fd = (up.graph_value[0] - dn.graph_value[0]) / (2.0 * dq);
      double rel = std::abs(der.d_graph(0, 0) - fd) / (1.0 + std::abs(fd));
      o.require(rel <= 1e-4, spec.name + fmt(": FD mismatch %.3g", rel));
    }
    {
      ManifoldSystem sys(bench::tanhline(0.5), grid);
      DerivativeSolution d0 = sys.solve_graph_derivative(0.0, vec2(1.0, 0.0));
      double prev = 1e300;
      for (double h : {0.5, 0.25, 0.1, 0.05}) {
        DerivativeSolution dh = sys.solve_graph_derivative(0.0, vec2(1.0 + h, 0.0));
        double d = op_norm(dh.d_graph - d0.d_graph, AmbientNorm::Max);
        o.require(d <= prev * 1.01 + 1e-6, fmt("modulus not non-increasing at h=%.2f", h));
        prev = d;
      }
    }
    report(6, "derivatives match central differences; C1 modulus non-increasing", o);
  }

  // ---- criterion 7: splitting certification --------------------------------
  {
    Outcome o;
    GridConfig fine = grid;
    fine.h = 0.005;
    LinearProcess lp =
        LinearProcess::build(bench::linear_zero(), 0.0, fine, fine.T_norm, fine.T_norm);
    SplittingCertificate cert = certify_splitting(lp, 1.0, -1.0);
    o.require(std::abs(cert.M - 1.0) <= 1e-9, fmt("constant-diag M = 1 %+.3g", cert.M - 1.0));

    LinearProcess lp2 =
        LinearProcess::build(bench::periodic_diag(), 0.0, fine, fine.T_norm, fine.T_norm);
    SplittingCertificate cert2 = certify_splitting(lp2, 1.0, -1.0);
    o.require(std::abs(cert2.M - std::exp(1.0)) <= 1e-6,
              fmt("periodic M = e %+.3g", cert2.M - std::exp(1.0)));

    bool not_split = false;
    try {
      certify_splitting(lp, 1.5, -1.0);
    } catch (const NotSplit&) {
      not_split = true;
    }
    o.require(not_split, "gamma = 1.5 on the constant system was not rejected");
    report(7, "splitting bounds M = 1 and M = e certified; overclaimed rate rejected", o);
  }

  // ---- criterion 8: determinism --------------------------------------------
  {
    Outcome o;
    auto canonical_bench = [&grid] {
      RunReport rep;
      rep.canonical["tool"] = kToolVersion;
      rep.canonical["command"] = "bench";
      rep.canonical["grid"] = to_json(grid);
      rep.canonical["bench"] = to_json(run_benchmarks(grid));
      return rep.canonical_dump();
    };
    std::string first = canonical_bench();
    std::string second = canonical_bench();
    o.require(!first.empty(), "empty canonical section");
    o.require(first == second, "canonical sections differ between runs");
    report(8, "two bench runs produce byte-identical canonical report sections", o);
  }

  double total = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_suite).count();
  std::printf("%d/8 criteria passed in %.1f s\n", 8 - failures, total);
  return failures == 0 ? 0 : 1;
}
