#include "lpm/benchmarks.hpp"

#include <cmath>

namespace lpm::bench {

namespace {

ProblemSpec planar_base() {
  ProblemSpec spec;
  spec.n = 2;
  spec.k = 1;
  spec.gamma = 1.0;
  spec.rho = -1.0;
  spec.ambient = AmbientNorm::Max;
  spec.gamma_norm = AdmissibleNorm::max_norm();
  spec.set_a(0, 0, expr::Expr::parse("1", 2));
  spec.set_a(1, 1, expr::Expr::parse("-1", 2));
  return spec;
}

}  // namespace

ProblemSpec rotgap(double eps) {
  ProblemSpec spec = planar_base();
  expr::Constants c{{"eps", eps}};
  spec.f = {expr::Expr::parse("eps*(-u2)", 2, c), expr::Expr::parse("eps*u1", 2, c)};
  spec.L1 = eps;
  spec.L2 = eps;
  spec.name = "rotgap(" + std::to_string(eps) + ")";
  return spec;
}

ProblemSpec tanhline(double eps) {
  ProblemSpec spec = planar_base();
  expr::Constants c{{"eps", eps}};
  spec.f = {expr::Expr::parse("0", 2), expr::Expr::parse("eps*tanh(u1)", 2, c)};
  spec.L1 = 0.0;
  spec.L2 = eps;
  spec.name = "tanhline(" + std::to_string(eps) + ")";
  return spec;
}

ProblemSpec periodic_diag() {
  ProblemSpec spec;
  spec.n = 2;
  spec.k = 1;
  spec.gamma = 1.0;
  spec.rho = -1.0;
  spec.ambient = AmbientNorm::Max;
  spec.gamma_norm = AdmissibleNorm::max_norm();
  spec.set_a(0, 0, expr::Expr::parse("1+0.5*sin(t)", 2));
  spec.set_a(1, 1, expr::Expr::parse("-1+0.5*cos(t)", 2));
  spec.f = {expr::Expr::parse("0", 2), expr::Expr::parse("0.3*sin(t)*tanh(u1)", 2)};
  spec.L1 = 0.0;
  // sup_t 0.3 * cS(t)/cN(t) = 0.3 * e^{sqrt(2)/2}; 0.62 is a safe upper bound
  spec.L2 = 0.62;
  spec.name = "periodic-diag";
  return spec;
}

ProblemSpec linear_zero() {
  ProblemSpec spec = planar_base();
  spec.f = {expr::Expr::parse("0", 2), expr::Expr::parse("0", 2)};
  spec.L1 = 0.0;
  spec.L2 = 0.1;  // declared upper bound; the true constant is 0
  spec.name = "linear-zero";
  return spec;
}

double rotgap_slope(double eps) { return (1.0 - std::sqrt(1.0 - eps * eps)) / eps; }

double tanhline_graph(double eps, double q) {
  if (q == 0.0) return 0.0;
  return eps * std::log(std::cosh(q)) / q;
}

double tanhline_slope(double eps, double q) {
  if (q == 0.0) return 0.0;
  return eps * (q * std::tanh(q) - std::log(std::cosh(q))) / (q * q);
}

}  // namespace lpm::bench
