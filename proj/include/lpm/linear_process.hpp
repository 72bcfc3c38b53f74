#pragma once

#include <vector>

#include "lpm/problem.hpp"

namespace lpm {

enum class Part { Unstable, Stable, Full };

struct SplittingEvidence {
  // anchor-outward: stable_* over t >= tau, unstable_* over t <= tau
  std::vector<double> stable_times, stable_values;
  std::vector<double> unstable_times, unstable_values;
};

struct SplittingCertificate {
  double gamma = 0.0;
  double rho = 0.0;
  double M = 1.0;  // window-truncated estimate of the splitting bound
  SplittingEvidence evidence;
};

/// Gridded fundamental solution of the block-diagonal linear part, anchored
/// at a base time. Per grid interval the unstable block is integrated
/// backward and the stable block forward (the directions the fixed-point
/// integrals apply them in); the opposite directions are the exact matrix
/// inverses, so the cocycle identity holds to rounding. Immutable after
/// construction.
class LinearProcess {
 public:
  static LinearProcess build(const ProblemSpec& spec, double tau, const GridConfig& grid,
                             double back_span, double fwd_span);
  static LinearProcess build(const ProblemSpec& spec, double tau, const GridConfig& grid);

  double anchor() const { return tau_; }
  double step() const { return h_; }
  int node_count() const { return static_cast<int>(times_.size()); }
  int anchor_index() const { return anchor_; }
  double time_at(int i) const { return times_[i]; }
  /// Exact-node lookup; throws OutOfWindow for times off the grid.
  int index_of(double t) const;

  int dim_unstable() const { return k_; }
  int dim_stable() const { return ns_; }

  const MatrixXd& phi_unstable(int i) const { return phiN_[i]; }
  const MatrixXd& phi_stable(int i) const { return phiS_[i]; }

  // one-step propagators per interval [t_i, t_{i+1}]
  const MatrixXd& step_backward_unstable(int i) const { return sN_bwd_[i]; }
  const MatrixXd& step_forward_unstable(int i) const { return sN_fwd_[i]; }
  const MatrixXd& step_forward_stable(int i) const { return sS_fwd_[i]; }
  const MatrixXd& step_backward_stable(int i) const { return sS_bwd_[i]; }

  /// Evaluates L(t,s)x per block, with linear interpolation of the
  /// fundamental matrices between grid nodes.
  VectorXd apply(double t, double s, const VectorXd& x, Part part) const;

  struct NormValue {
    double value = 0.0;
    double argmax_time = 0.0;
    bool boundary = false;  // sup attained at the window edge: possible under-truncation
  };

  /// |x|_{N(theta)}: grid sup of e^{rho(t-theta)}||L(t,theta)x|| over
  /// [theta - T_norm, theta].
  NormValue unstable_norm(double theta, const VectorXd& xN, double rho) const;
  /// |x|_{S(theta)}: grid sup of e^{gamma(t-theta)}||L(t,theta)x|| over
  /// [theta, theta + T_norm].
  NormValue stable_norm(double theta, const VectorXd& xS, double gamma) const;
  /// Moving norm Γ(|Qx|_{N(theta)}, |(I-Q)x|_{S(theta)}) at the declared rates.
  double moving_norm(double theta, const VectorXd& x, const AdmissibleNorm& gnorm) const;

  /// True when both blocks are one-dimensional: per-node norm scales are
  /// exact and O(1).
  bool scalar_blocks() const { return k_ == 1 && ns_ == 1; }
  double unstable_scale(int i) const { return cN_[i]; }
  double stable_scale(int i) const { return cS_[i]; }
  bool unstable_scale_boundary(int i) const { return cNb_[i]; }
  bool stable_scale_boundary(int i) const { return cSb_[i]; }

  double declared_gamma() const { return gamma_; }
  double declared_rho() const { return rho_; }
  AmbientNorm ambient() const { return ambient_; }
  int norm_window_steps() const { return wnorm_; }

 private:
  LinearProcess() = default;
  void build_norm_scales();

  double tau_ = 0.0, h_ = 0.0;
  int anchor_ = 0, k_ = 0, ns_ = 0, wnorm_ = 0;
  double gamma_ = 0.0, rho_ = 0.0;
  AmbientNorm ambient_ = AmbientNorm::Max;
  std::vector<double> times_;
  std::vector<MatrixXd> phiN_, phiS_;
  std::vector<MatrixXd> sN_bwd_, sN_fwd_, sS_fwd_, sS_bwd_;
  std::vector<double> cN_, cS_;
  std::vector<char> cNb_, cSb_;
  std::vector<int> aN_, aS_;
};

/// Sweeps the splitting estimates over the grid anchored at the base time
/// and returns the minimal window bound M; throws NotSplit when the measured
/// evidence grows without plateau (last-quarter max above the earlier max by
/// more than 1%).
SplittingCertificate certify_splitting(const LinearProcess& lp, double gamma, double rho);

/// Norm evaluators backed by this process (times snap to the nearest grid
/// node), for the Lipschitz falsification probe.
NormSystem process_norm_system(const LinearProcess& lp, const AdmissibleNorm& gnorm);

}  // namespace lpm
