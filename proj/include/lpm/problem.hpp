#pragma once

#include <Eigen/Core>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "lpm/expr.hpp"

namespace lpm {

using Eigen::MatrixXd;
using Eigen::VectorXd;

enum class AmbientNorm { Max, Sum, Euclid };

const char* ambient_name(AmbientNorm a);
std::optional<AmbientNorm> ambient_from_name(const std::string& name);

double vec_norm(const VectorXd& x, AmbientNorm norm);
/// Norm of the dual functional x ↦ row·x on (ℝⁿ, ambient norm).
double dual_norm(const VectorXd& row, AmbientNorm norm);
/// Operator norm induced by the ambient norm (spectral norm for Euclid).
double op_norm(const MatrixXd& m, AmbientNorm norm);

/// Norm Γ on ℝ², strictly monotone in each argument on [0,∞): a p-norm with
/// p ≥ 1 or the max norm. Combines the two subspace norms into the moving
/// norm on the full space.
class AdmissibleNorm {
 public:
  static AdmissibleNorm p_norm(double p);
  static AdmissibleNorm max_norm();
  AdmissibleNorm() : AdmissibleNorm(max_norm()) {}

  double operator()(double a, double b) const;

  /// c with |a|+|b| ≤ c·Γ(a,b): 2^{1−1/p} for p-norms, 2 for max.
  double c_gamma() const;

  bool is_max() const { return is_max_; }
  double p() const { return p_; }
  std::string name() const;

  bool operator==(const AdmissibleNorm& o) const = default;

 private:
  AdmissibleNorm(bool is_max, double p) : is_max_(is_max), p_(p) {}
  bool is_max_;
  double p_;
};

/// Discretization and stopping parameters shared by all numerical operations.
struct GridConfig {
  double h = 0.01;              // integration / quadrature step
  double T_window = 40.0;       // truncation of the half-infinite interval
  double T_norm = 20.0;         // window for the subspace-norm suprema
  double tol_fixed_point = 1e-10;
  double tail_tol = 1e-8;

  void validate() const;  // throws Error on violated invariants
};

/// The semilinear system u' = A(t)u + f(t,u) on ℝⁿ in adapted coordinates:
/// A(t) block-diagonal against the split ℝᵏ × ℝ^{n−k}, Q the coordinate
/// projection onto the first k coordinates.
struct ProblemSpec {
  int n = 0;
  int k = 0;
  double gamma = 0.0;  // declared forward decay exponent of the stable block
  double rho = 0.0;    // declared backward growth exponent of the unstable block

  // A entries: row-major n×n, missing entries are zero.
  std::vector<std::optional<expr::Expr>> a_entries;
  std::vector<expr::Expr> f;  // n components

  double L1 = 0.0;  // declared Lipschitz constant of Qf w.r.t. the moving norm
  double L2 = 0.0;  // declared Lipschitz constant of (I−Q)f

  AmbientNorm ambient = AmbientNorm::Max;
  AdmissibleNorm gamma_norm = AdmissibleNorm::max_norm();

  std::string name;  // identifier used in reports

  void set_a(int i, int j, expr::Expr e);
  const std::optional<expr::Expr>& a(int i, int j) const;

  MatrixXd eval_a(double t) const;
  MatrixXd eval_a_unstable(double t) const;  // k×k block
  MatrixXd eval_a_stable(double t) const;    // (n−k)×(n−k) block
  VectorXd eval_f(double t, const VectorXd& u) const;
  MatrixXd eval_df(double t, const VectorXd& u) const;  // Jacobian w.r.t. u

  int dim_stable() const { return n - k; }
};

struct ValidationReport {
  struct Item {
    std::string name;
    bool pass;
    std::string detail;
  };
  std::vector<Item> items;
  bool ok = true;

  void add(std::string name, bool pass, std::string detail = "");
};

/// Checks the structural invariants on a sample grid: block-diagonality of
/// A, f(t,0)=0, sign constraints on L1/L2 and the grid parameters.
ValidationReport validate_spec(const ProblemSpec& spec, const GridConfig& grid);

/// validate_spec + throw on the first failed invariant.
void ensure_valid(const ProblemSpec& spec, const GridConfig& grid);

/// Pluggable norm evaluators for the Lipschitz probe. Defaults to the plain
/// ambient norms (exact whenever the moving norms reduce to them, as for
/// constant diagonal A); the CLI wires process-backed moving norms.
struct NormSystem {
  std::function<double(double t, const VectorXd& xN)> unstable;
  std::function<double(double t, const VectorXd& xS)> stable;
  std::function<double(double t, const VectorXd& x)> moving;
};

NormSystem ambient_norm_system(const ProblemSpec& spec);

struct LipschitzEstimate {
  double L1_emp = 0.0;
  double L2_emp = 0.0;
};

/// Empirical lower bounds on the true Lipschitz constants of Qf and (I−Q)f,
/// from random pairs plus coordinate-aligned perturbations in the box
/// [−box_radius, box_radius]ⁿ with t sampled in [−10, 10].
LipschitzEstimate estimate_lipschitz(const ProblemSpec& spec, int samples, double box_radius,
                                     const NormSystem* norms = nullptr, unsigned seed = 12345);

}  // namespace lpm
