#pragma once

#include "lpm/problem.hpp"

namespace lpm::bench {

/// Planar system u' = diag(1,-1)u + eps*(-u2, u1) with the rotation term
/// treated as nonlinearity; the invariant graph is the unstable eigenline
/// with slope (1 - sqrt(1 - eps^2))/eps, and eps >= 1 has no such graph.
ProblemSpec rotgap(double eps);

/// u' = diag(1,-1)u + (0, eps*tanh(u1)): L1 = 0, analytic graph
/// Sigma(q) = eps*log(cosh q)/q.
ProblemSpec tanhline(double eps = 0.5);

/// Non-autonomous diagonal A(t) = diag(1 + 0.5 sin t, -1 + 0.5 cos t) with
/// f = (0, 0.3 sin(t) tanh(u1)); no closed-form graph (shooting oracle).
ProblemSpec periodic_diag();

/// Linear system diag(1,-1) with f = 0 (declared L2 > 0 as an upper bound).
ProblemSpec linear_zero();

double rotgap_slope(double eps);           // (1 - sqrt(1 - eps^2))/eps
double tanhline_graph(double eps, double q);  // eps*log(cosh q)/q, 0 at 0
double tanhline_slope(double eps, double q);  // d/dq of the above

}  // namespace lpm::bench
