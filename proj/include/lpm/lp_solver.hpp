#pragma once

#include <string>
#include <vector>

#include "lpm/gap.hpp"
#include "lpm/linear_process.hpp"
#include "lpm/problem.hpp"

namespace lpm {

/// Per-solve certificate data. apost_error = banach_bound (fixed-point part,
/// θ*/(1−θ*) times the last increment) + quadrature_error (computable
/// composite-trapezoid estimate, amplified by 1/(1−θ*)) + tail_bound
/// (window-truncation estimate). All measured in the weighted sup norm,
/// whose weight is 1 at the anchor where the graph value is read off.
struct SolveDiagnostics {
  int iterations = 0;
  double last_increment = 0.0;
  double theta_star = 0.0;
  double banach_bound = 0.0;
  double quadrature_error = 0.0;
  double tail_bound = 0.0;
  double apost_error = 0.0;
  double weighted_norm = 0.0;
  std::vector<double> ratios;  // increment ratios after the first sweep
};

/// Gridded trajectory z(t_i) ∈ ℝⁿ on a finite window with weighted sup-norm
/// metadata (the discrete stand-in for the weighted solution spaces).
struct TrajectorySegment {
  double tau = 0.0;
  double weight_exponent = 0.0;
  std::vector<double> times;
  std::vector<VectorXd> states;

  bool backward() const { return !times.empty() && times.front() < tau; }
};

/// Same grid, matrix values Z(t_i) ∈ ℝ^{n×n}.
struct OperatorSegment {
  double tau = 0.0;
  double weight_exponent = 0.0;
  std::vector<double> times;
  std::vector<MatrixXd> states;
};

struct UnstableSolution {
  TrajectorySegment segment;
  VectorXd graph_value;  // Σ(τ,η) ∈ ℝ^{n−k}
  SolveDiagnostics diag;
};

struct StableSolution {
  TrajectorySegment segment;
  VectorXd graph_value;  // Θ(τ,η) ∈ ℝᵏ
  SolveDiagnostics diag;
};

struct DerivativeSolution {
  OperatorSegment segment;
  MatrixXd d_graph;  // D_ηΣ(τ,η): (n−k)×n
  SolveDiagnostics diag;
};

/// Backward fixed-point solve: the unique solution with controlled backward
/// growth through the prescribed unstable component Qη at the anchor.
/// Returns the segment and the graph value Σ(τ,η) = (I−Q)z(τ); the result
/// depends on Qη only.
UnstableSolution solve_unstable(const ProblemSpec& spec, const LinearProcess& lp,
                                const GapCertificate& gap, double tau, const VectorXd& eta,
                                const GridConfig& grid);

/// Forward mirror: the solution decaying forward through the prescribed
/// stable component; Θ(τ,η) = Q z(τ) depends on (I−Q)η only.
StableSolution solve_stable(const ProblemSpec& spec, const LinearProcess& lp,
                            const GapCertificate& gap, double tau, const VectorXd& eta,
                            const GridConfig& grid);

/// Linearized backward solve along a converged base segment; returns
/// D_ηΣ(τ,η) as the stable rows of the operator fixed point at the anchor.
DerivativeSolution solve_derivative(const ProblemSpec& spec, const LinearProcess& lp,
                                    const GapCertificate& gap, double tau,
                                    const GridConfig& grid, const TrajectorySegment& base);

/// One extra application of the fixed-point operator to a returned segment;
/// the weighted-norm change (≤ 2·tol for a converged solve).
double unstable_residual(const ProblemSpec& spec, const LinearProcess& lp,
                         const GapCertificate& gap, double tau, const VectorXd& eta,
                         const GridConfig& grid, const TrajectorySegment& segment);

struct ChartPoint {
  VectorXd q;          // base point in ℝᵏ
  VectorXd graph;      // Σ(τ,q) ∈ ℝ^{n−k}
  SolveDiagnostics diag;
  std::string error;   // nonempty when this point failed
  bool ok() const { return error.empty(); }
};

struct ManifoldChart {
  double tau = 0.0;
  std::vector<ChartPoint> points;
  double max_lipschitz_ratio = 0.0;  // max pairwise |ΔΣ|_S / |Δq|_N
  std::vector<std::string> violations;
};

/// Solves one base point per entry (concurrently for large batches),
/// collects diagnostics, and checks the chart invariants (zero preservation
/// at q = 0, pairwise Lipschitz bound with κ_Σ plus solve error allowances).
/// Per-point failures are recorded, not fatal.
ManifoldChart sample_chart(const ProblemSpec& spec, const LinearProcess& lp,
                           const GapCertificate& gap, double tau,
                           const std::vector<VectorXd>& base_points, const GridConfig& grid);

/// A validated problem bundled with its certificates; builds the linear
/// process for any requested anchor time. The entry point the verification
/// harness and the CLI drive.
class ManifoldSystem {
 public:
  ManifoldSystem(ProblemSpec spec, GridConfig grid);

  const ProblemSpec& spec() const { return spec_; }
  const GridConfig& grid() const { return grid_; }
  const GapCertificate& gap() const { return gap_; }

  LinearProcess make_process(double anchor) const;
  LinearProcess make_process(double anchor, double back_span, double fwd_span) const;

  UnstableSolution solve_graph_point(double tau, const VectorXd& eta) const;
  StableSolution solve_stable_point(double tau, const VectorXd& eta) const;
  DerivativeSolution solve_graph_derivative(double tau, const VectorXd& eta) const;
  ManifoldChart chart(double tau, const std::vector<VectorXd>& base_points) const;

 private:
  ProblemSpec spec_;
  GridConfig grid_;
  GapCertificate gap_;
};

}  // namespace lpm
