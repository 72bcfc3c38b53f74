#pragma once

#include <map>
#include <optional>

#include "lpm/dynamics.hpp"
#include "lpm/lp_solver.hpp"

namespace lpm {

/// One numerical pass/fail check of a theorem inequality. The pass criterion
/// is always measured <= bound*(1+tol_rel) + tol_abs with both tolerances
/// recorded; `measured` and `bound` are exactly the two sides named by the
/// check, up to the recorded solve/integration error allowances.
struct CheckReport {
  std::string name;
  std::string system;
  std::string params;
  double measured = 0.0;
  double bound = 0.0;
  double tol_rel = 1e-2;
  double tol_abs = 1e-6;
  double slack = 0.0;
  bool pass = false;
  double runtime_sec = 0.0;
  std::string detail;

  void finish();
};

/// Invariance defect: flow chart points forward and compare the stable
/// component against a fresh graph solve at the arrival time. Pass when the
/// defect stays within 10x the combined solver + integration error estimates.
CheckReport check_invariance(const ManifoldSystem& sys, double tau, double horizon,
                             const std::vector<VectorXd>& base_points);

/// Attraction estimate with exponent omega: the stable-norm distance to the
/// projected orbit never exceeds its initial value times e^{-omega(t-tau)}.
/// Also fits and reports the empirical decay exponent.
CheckReport check_attraction(const ManifoldSystem& sys, double tau, const VectorXd& eta_off,
                             double horizon);

/// (a) pairwise Lipschitz bound with kappa_sigma on a sampled chart;
/// (b) cone condition: zeta = |v|_S - kappa|u|_N nonpositive backward along
/// pairs of graph solutions, and at most one sign change forward.
CheckReport check_lipschitz_and_cone(const ManifoldSystem& sys, double tau,
                                     const std::vector<VectorXd>& base_points);

/// Refined controlled growth of graph trajectories in the past.
CheckReport check_backward_growth(const ManifoldSystem& sys, double tau,
                                  const std::vector<VectorXd>& base_points);

/// Forward decay from the stable graph with rate gamma - L2*Gamma(kappa_theta,1).
CheckReport check_stable_decay(const ManifoldSystem& sys, double tau, const VectorXd& eta,
                               double horizon);

/// C1 continuity modulus d(h) = ||D Sigma(tau, eta + h e) - D Sigma(tau, eta)||
/// over a decreasing h sequence: non-increasing within tolerance and small at
/// the finest step.
CheckReport check_c1(const ManifoldSystem& sys, double tau, const VectorXd& eta,
                     const std::vector<double>& h_sequence);

/// Independent manifold-point oracle: minimizes the weighted backward growth
/// of the orbit through (q, p) over the free stable component p (scalar
/// stable blocks). Uses only backward integration of the full vector field.
double shoot_graph_point(const ProblemSpec& spec, double tau, const VectorXd& q, double span,
                         const GridConfig& grid, double weight_exponent = 0.0);

struct BenchSystemResult {
  std::string system;
  std::string gap_error;  // nonempty when the gap condition fails (expected for rotgap(1.0))
  std::optional<GapCertificate> gap;
  std::vector<CheckReport> checks;
  std::map<std::string, double> scalars;  // named measured values (slopes, errors, ratios)

  bool all_pass() const;
};

struct BenchResult {
  std::vector<BenchSystemResult> systems;
  bool all_pass() const;
};

/// Full battery: rotgap eps in {0.2, 0.5, 0.6, 0.9} (slope vs the eigenline,
/// contraction certificates; full theorem battery at 0.6), tanhline(0.5)
/// (analytic graph + derivative), periodic-diag (shooting oracle), and the
/// sharpness failure case rotgap(1.0) which must raise GapFails.
BenchResult run_benchmarks(const GridConfig& grid);

}  // namespace lpm
