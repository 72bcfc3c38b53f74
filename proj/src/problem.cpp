#include "lpm/problem.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <random>

#include "lpm/errors.hpp"

namespace lpm {

const char* ambient_name(AmbientNorm a) {
  switch (a) {
    case AmbientNorm::Max: return "max";
    case AmbientNorm::Sum: return "sum";
    case AmbientNorm::Euclid: return "euclid";
  }
  return "?";
}

std::optional<AmbientNorm> ambient_from_name(const std::string& name) {
  if (name == "max") return AmbientNorm::Max;
  if (name == "sum") return AmbientNorm::Sum;
  if (name == "euclid") return AmbientNorm::Euclid;
  return std::nullopt;
}

double vec_norm(const VectorXd& x, AmbientNorm norm) {
  switch (norm) {
    case AmbientNorm::Max: return x.size() ? x.cwiseAbs().maxCoeff() : 0.0;
    case AmbientNorm::Sum: return x.cwiseAbs().sum();
    case AmbientNorm::Euclid: return x.norm();
  }
  return 0.0;
}

double dual_norm(const VectorXd& row, AmbientNorm norm) {
  switch (norm) {
    case AmbientNorm::Max: return row.cwiseAbs().sum();
    case AmbientNorm::Sum: return row.size() ? row.cwiseAbs().maxCoeff() : 0.0;
    case AmbientNorm::Euclid: return row.norm();
  }
  return 0.0;
}

double op_norm(const MatrixXd& m, AmbientNorm norm) {
  if (m.size() == 0) return 0.0;
  switch (norm) {
    case AmbientNorm::Max: return m.cwiseAbs().rowwise().sum().maxCoeff();
    case AmbientNorm::Sum: return m.cwiseAbs().colwise().sum().maxCoeff();
    case AmbientNorm::Euclid: {
      Eigen::JacobiSVD<MatrixXd> svd(m);
      return svd.singularValues()(0);
    }
  }
  return 0.0;
}

AdmissibleNorm AdmissibleNorm::p_norm(double p) {
  if (!(p >= 1.0)) throw Error("admissible p-norm requires p >= 1");
  return AdmissibleNorm(false, p);
}

AdmissibleNorm AdmissibleNorm::max_norm() { return AdmissibleNorm(true, 0.0); }

double AdmissibleNorm::operator()(double a, double b) const {
  a = std::abs(a);
  b = std::abs(b);
  if (is_max_) return std::max(a, b);
  if (p_ == 1.0) return a + b;
  if (p_ == 2.0) return std::hypot(a, b);
  return std::pow(std::pow(a, p_) + std::pow(b, p_), 1.0 / p_);
}

double AdmissibleNorm::c_gamma() const {
  if (is_max_) return 2.0;
  return std::pow(2.0, 1.0 - 1.0 / p_);
}

std::string AdmissibleNorm::name() const {
  if (is_max_) return "max";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", p_);
  return buf;
}

void GridConfig::validate() const {
  if (!(h > 0.0)) throw Error("grid: h must be positive");
  if (!(T_norm > 0.0)) throw Error("grid: t_norm must be positive");
  if (!(T_window >= T_norm)) throw Error("grid: t_window must be >= t_norm");
  if (!(tol_fixed_point > 0.0) || !(tail_tol > 0.0))
    throw Error("grid: tolerances must be positive");
}

void ProblemSpec::set_a(int i, int j, expr::Expr e) {
  a_entries.resize(static_cast<std::size_t>(n) * n);
  a_entries[static_cast<std::size_t>(i) * n + j] = std::move(e);
}

const std::optional<expr::Expr>& ProblemSpec::a(int i, int j) const {
  static const std::optional<expr::Expr> empty;
  if (a_entries.empty()) return empty;
  return a_entries[static_cast<std::size_t>(i) * n + j];
}

MatrixXd ProblemSpec::eval_a(double t) const {
  MatrixXd m = MatrixXd::Zero(n, n);
  static const VectorXd no_state;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (const auto& e = a(i, j)) m(i, j) = e->eval(t, no_state);
  return m;
}

MatrixXd ProblemSpec::eval_a_unstable(double t) const {
  MatrixXd m = MatrixXd::Zero(k, k);
  static const VectorXd no_state;
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j)
      if (const auto& e = a(i, j)) m(i, j) = e->eval(t, no_state);
  return m;
}

MatrixXd ProblemSpec::eval_a_stable(double t) const {
  const int m = dim_stable();
  MatrixXd out = MatrixXd::Zero(m, m);
  static const VectorXd no_state;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      if (const auto& e = a(k + i, k + j)) out(i, j) = e->eval(t, no_state);
  return out;
}

VectorXd ProblemSpec::eval_f(double t, const VectorXd& u) const {
  VectorXd out(n);
  for (int i = 0; i < n; ++i) out[i] = f[i].eval(t, u);
  return out;
}

MatrixXd ProblemSpec::eval_df(double t, const VectorXd& u) const {
  MatrixXd out(n, n);
  VectorXd grad;
  for (int i = 0; i < n; ++i) {
    f[i].eval_grad(t, u, grad);
    out.row(i) = grad.transpose();
  }
  return out;
}

void ValidationReport::add(std::string name, bool pass, std::string detail) {
  ok = ok && pass;
  items.push_back({std::move(name), pass, std::move(detail)});
}

namespace {

std::vector<double> sample_times() {
  std::vector<double> ts;
  for (int i = 0; i <= 80; ++i) ts.push_back(-20.0 + 0.5 * i);
  return ts;
}

}  // namespace

ValidationReport validate_spec(const ProblemSpec& spec, const GridConfig& grid) {
  ValidationReport rep;

  rep.add("dimensions", spec.n >= 2 && spec.k >= 1 && spec.k <= spec.n - 1,
          "n=" + std::to_string(spec.n) + " k=" + std::to_string(spec.k));
  if (!rep.ok) return rep;

  rep.add("f component count", static_cast<int>(spec.f.size()) == spec.n);
  rep.add("lipschitz signs", spec.L1 >= 0.0 && spec.L2 > 0.0,
          "L1 >= 0 and L2 > 0 required");
  rep.add("splitting exponents", spec.gamma > spec.rho, "gamma > rho required");

  bool grid_ok = true;
  std::string grid_detail;
  try {
    grid.validate();
  } catch (const Error& e) {
    grid_ok = false;
    grid_detail = e.what();
  }
  rep.add("grid parameters", grid_ok, grid_detail);
  if (!rep.ok) return rep;

  const auto ts = sample_times();

  bool block_ok = true;
  std::string block_detail;
  for (double t : ts) {
    MatrixXd a = spec.eval_a(t);
    for (int i = 0; i < spec.n && block_ok; ++i)
      for (int j = 0; j < spec.n; ++j) {
        bool off_block = (i < spec.k) != (j < spec.k);
        if (off_block && std::abs(a(i, j)) > 1e-12) {
          block_ok = false;
          block_detail = "A(" + std::to_string(i + 1) + "," + std::to_string(j + 1) +
                         ") nonzero at t=" + std::to_string(t);
          break;
        }
      }
    if (!block_ok) break;
  }
  rep.add("A block-diagonal on sample grid", block_ok, block_detail);

  bool zero_ok = true;
  std::string zero_detail;
  const VectorXd origin = VectorXd::Zero(spec.n);
  for (double t : ts) {
    double r = vec_norm(spec.eval_f(t, origin), spec.ambient);
    if (r > 1e-12) {
      zero_ok = false;
      zero_detail = "||f(t,0)|| = " + std::to_string(r) + " at t=" + std::to_string(t);
      break;
    }
  }
  rep.add("f(t,0) = 0 on sample grid", zero_ok, zero_detail);

  return rep;
}

void ensure_valid(const ProblemSpec& spec, const GridConfig& grid) {
  ValidationReport rep = validate_spec(spec, grid);
  for (const auto& item : rep.items) {
    if (item.pass) continue;
    std::string msg = "validation failed: " + item.name +
                      (item.detail.empty() ? "" : " (" + item.detail + ")");
    if (item.name == "f(t,0) = 0 on sample grid") throw ZeroConditionViolated(msg);
    if (item.name == "A block-diagonal on sample grid") throw NonBlockDiagonal(msg);
    throw Error(msg);
  }
}

NormSystem ambient_norm_system(const ProblemSpec& spec) {
  AmbientNorm a = spec.ambient;
  AdmissibleNorm g = spec.gamma_norm;
  int k = spec.k;
  NormSystem sys;
  sys.unstable = [a](double, const VectorXd& x) { return vec_norm(x, a); };
  sys.stable = [a](double, const VectorXd& x) { return vec_norm(x, a); };
  sys.moving = [a, g, k](double, const VectorXd& x) {
    return g(vec_norm(x.head(k), a), vec_norm(x.tail(x.size() - k), a));
  };
  return sys;
}

LipschitzEstimate estimate_lipschitz(const ProblemSpec& spec, int samples, double box_radius,
                                     const NormSystem* norms, unsigned seed) {
  if (samples < 2) throw Error("estimate_lipschitz: samples must be >= 2");

  NormSystem local;
  if (!norms) {
    local = ambient_norm_system(spec);
    norms = &local;
  }

  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> box(-box_radius, box_radius);
  std::uniform_real_distribution<double> time(-10.0, 10.0);
  std::uniform_int_distribution<int> coord(0, spec.n - 1);

  LipschitzEstimate est;
  for (int s = 0; s < samples; ++s) {
    double t = time(rng);
    VectorXd u(spec.n);
    for (int i = 0; i < spec.n; ++i) u[i] = box(rng);
    VectorXd v(spec.n);
    if (s % 2 == 0) {
      // coordinate-aligned pair: the sup is attained on axis directions.
      // The perturbation is floored well above rounding so the difference
      // quotient is not contaminated by cancellation.
      v = u;
      double step = box(rng);
      double mag = (0.01 + std::abs(step)) * 1e-2 * box_radius;
      v[coord(rng)] += step >= 0.0 ? mag : -mag;
    } else {
      for (int i = 0; i < spec.n; ++i) v[i] = box(rng);
    }
    double den = norms->moving(t, u - v);
    if (den == 0.0) continue;  // degenerate pair, excluded by construction

    VectorXd df = spec.eval_f(t, u) - spec.eval_f(t, v);
    double l1 = norms->unstable(t, df.head(spec.k)) / den;
    double l2 = norms->stable(t, df.tail(spec.dim_stable())) / den;
    est.L1_emp = std::max(est.L1_emp, l1);
    est.L2_emp = std::max(est.L2_emp, l2);
  }
  return est;
}

}  // namespace lpm
