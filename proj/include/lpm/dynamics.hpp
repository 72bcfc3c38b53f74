#pragma once

#include <optional>

#include "lpm/lp_solver.hpp"
#include "lpm/problem.hpp"

namespace lpm {

/// Forward orbit of the nonlinear process from (tau, eta), gridded with the
/// configured step.
struct FlowSample {
  double tau = 0.0;
  std::vector<double> times;
  std::vector<VectorXd> states;

  /// max over five sampled times of the variation-of-constants residual,
  /// when a linear process was supplied for the check
  std::optional<double> duhamel_residual;
  /// step-doubling (Richardson) estimate of the integration error
  std::optional<double> error_estimate;

  const VectorXd& at(int i) const { return states[i]; }
  VectorXd state_at_time(double t) const;  // linear interpolation
};

struct FlowOptions {
  const LinearProcess* duhamel_check = nullptr;  // requires window coverage
  bool estimate_error = false;                   // integrate again at h/2
};

/// Classical RK4 with fixed step on u' = A(t)u + f(t,u). Throws Overflow
/// when the state norm passes 1e12 (f not prepared for global use).
FlowSample integrate_process(const ProblemSpec& spec, double tau, const VectorXd& eta,
                             double t_end, const GridConfig& grid, const FlowOptions& opts = {});

/// Backward RK4 on the same vector field (used by the shooting oracle and
/// the cone checks; not part of the process interface).
FlowSample integrate_backward(const ProblemSpec& spec, double tau, const VectorXd& eta,
                              double t_begin, const GridConfig& grid);

/// Nonlinear projection onto the invariant graph: Qx + Σ(t, Qx) via a fresh
/// backward solve anchored at t.
VectorXd project_graph(const ManifoldSystem& sys, double t, const VectorXd& x);

/// Nonlinear projection onto the stable graph: Θ(t, x) + (I−Q)x.
VectorXd project_stable(const ManifoldSystem& sys, double t, const VectorXd& x);

}  // namespace lpm
