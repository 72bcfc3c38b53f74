#include "lpm/lp_solver.hpp"

#include <cfloat>
#include <cmath>
#include <future>

#include "lpm/errors.hpp"

namespace lpm {

namespace {

// One Picard problem on a window anchored at tau: the backward (graph) solve
// lives on [tau-T, tau] with the prescribed unstable component entering as
// the affine part, the forward (stable-graph) solve on [tau, tau+T] with the
// prescribed stable component. Both sweeps share the same shape:
//   new_N(t) = aff_N(t) - ∫_t^{top} L(t,s) Q g(s) ds
//   new_S(t) = aff_S(t) + ∫_{bottom}^t L(t,s) (I-Q) g(s) ds
// with the integrals accumulated through one-step propagators (composite
// trapezoid on the grid).
struct Engine {
  const ProblemSpec* spec = nullptr;
  const LinearProcess* lp = nullptr;
  const GapCertificate* gap = nullptr;
  const GridConfig* grid = nullptr;

  bool backward = true;
  int lo = 0, hi = 0;  // global node range, inclusive
  int cols = 1;
  double tau = 0.0;
  double sigma = 0.0, theta = 0.0;

  std::vector<MatrixXd> affN, affS;
  std::vector<MatrixXd> dfcache;  // derivative mode only
  bool derivative_mode = false;

  int count() const { return hi - lo + 1; }
  double node_time(int c) const { return lp->time_at(lo + c); }
  double weight(int c) const { return std::exp(sigma * (node_time(c) - tau)); }

  void eval_rhs(int c, const MatrixXd& vN, const MatrixXd& vS, MatrixXd& gN,
                MatrixXd& gS) const {
    const int k = spec->k, ns = spec->dim_stable();
    if (derivative_mode) {
      MatrixXd z(k + ns, cols);
      z.topRows(k) = vN;
      z.bottomRows(ns) = vS;
      MatrixXd g = dfcache[c] * z;
      gN = g.topRows(k);
      gS = g.bottomRows(ns);
    } else {
      VectorXd u(k + ns);
      u.head(k) = vN.col(0);
      u.tail(ns) = vS.col(0);
      VectorXd fv = spec->eval_f(node_time(c), u);
      gN = fv.head(k);
      gS = fv.tail(ns);
    }
  }

  // Induced norm of a block against the ambient ball (exact for width-1 and
  // for one-dimensional blocks; a column-combination upper bound otherwise).
  double block_induced(const MatrixXd& b, bool unstable_part, int node) const {
    const AmbientNorm amb = spec->ambient;
    if (cols == 1) {
      if (lp->scalar_blocks())
        return (unstable_part ? lp->unstable_scale(lo + node) : lp->stable_scale(lo + node)) *
               std::abs(b(0, 0));
      auto nv = unstable_part ? lp->unstable_norm(node_time(node), b.col(0), gap->rho)
                              : lp->stable_norm(node_time(node), b.col(0), gap->gamma);
      return nv.value;
    }
    if (lp->scalar_blocks()) {
      double scale = unstable_part ? lp->unstable_scale(lo + node) : lp->stable_scale(lo + node);
      return scale * dual_norm(b.row(0).transpose(), amb);
    }
    // column norms combined by the dual pattern of the ambient norm
    VectorXd colnorms(b.cols());
    for (int j = 0; j < b.cols(); ++j) {
      auto nv = unstable_part ? lp->unstable_norm(node_time(node), b.col(j), gap->rho)
                              : lp->stable_norm(node_time(node), b.col(j), gap->gamma);
      colnorms[j] = nv.value;
    }
    switch (amb) {
      case AmbientNorm::Max: return colnorms.sum();
      case AmbientNorm::Sum: return colnorms.maxCoeff();
      case AmbientNorm::Euclid: return colnorms.norm();
    }
    return colnorms.sum();
  }

  double node_norm(int c, const MatrixXd& xN, const MatrixXd& xS) const {
    return spec->gamma_norm(block_induced(xN, true, c), block_induced(xS, false, c));
  }
};

struct PicardRun {
  std::vector<MatrixXd> vN, vS;  // converged iterate
  std::vector<MatrixXd> gN, gS;  // rhs samples on it
  SolveDiagnostics diag;
};

double weighted_norm_of(const Engine& e, const std::vector<MatrixXd>& vN,
                        const std::vector<MatrixXd>& vS) {
  double out = 0.0;
  for (int c = 0; c < e.count(); ++c)
    out = std::max(out, e.weight(c) * e.node_norm(c, vN[c], vS[c]));
  return out;
}

// One operator application: fills gN/gS with the rhs samples of (vN,vS) and
// writes the image into (outN,outS).
void apply_operator(const Engine& e, const std::vector<MatrixXd>& vN,
                    const std::vector<MatrixXd>& vS, std::vector<MatrixXd>& gN,
                    std::vector<MatrixXd>& gS, std::vector<MatrixXd>& outN,
                    std::vector<MatrixXd>& outS) {
  const int m = e.count();
  const double h = e.lp->step();
  for (int c = 0; c < m; ++c) e.eval_rhs(c, vN[c], vS[c], gN[c], gS[c]);

  MatrixXd acc = MatrixXd::Zero(e.spec->k, e.cols);
  outN[m - 1] = e.affN[m - 1];
  for (int c = m - 2; c >= 0; --c) {
    const int i = e.lo + c;  // interval [t_i, t_{i+1}]
    acc = e.lp->step_backward_unstable(i) * (acc + (0.5 * h) * gN[c + 1]) + (0.5 * h) * gN[c];
    outN[c] = e.affN[c] - acc;
  }

  acc = MatrixXd::Zero(e.spec->dim_stable(), e.cols);
  outS[0] = e.affS[0];
  for (int c = 1; c < m; ++c) {
    const int i = e.lo + c - 1;
    acc = e.lp->step_forward_stable(i) * (acc + (0.5 * h) * gS[c - 1]) + (0.5 * h) * gS[c];
    outS[c] = e.affS[c] + acc;
  }
}

// Quadrature-error estimate for the two accumulated integrals: Richardson
// comparison of the composite trapezoid at step h against step 2h on the
// same integrand samples ((I_h - I_2h)/3 estimates the h-rule error), taken
// in the weighted norm and amplified through the fixed-point feedback, with
// a safety factor of 2 on the leading-order extrapolation.
double quadrature_estimate(const Engine& e, const std::vector<MatrixXd>& gN,
                           const std::vector<MatrixXd>& gS) {
  const int m = e.count();
  if (m < 5) return 0.0;
  const double h = e.lp->step();

  std::vector<MatrixXd> in_fine(m), js_fine(m);
  MatrixXd acc = MatrixXd::Zero(e.spec->k, e.cols);
  in_fine[m - 1] = acc;
  for (int c = m - 2; c >= 0; --c) {
    acc = e.lp->step_backward_unstable(e.lo + c) * (acc + (0.5 * h) * gN[c + 1]) +
          (0.5 * h) * gN[c];
    in_fine[c] = acc;
  }
  acc = MatrixXd::Zero(e.spec->dim_stable(), e.cols);
  js_fine[0] = acc;
  for (int c = 1; c < m; ++c) {
    acc = e.lp->step_forward_stable(e.lo + c - 1) * (acc + (0.5 * h) * gS[c - 1]) +
          (0.5 * h) * gS[c];
    js_fine[c] = acc;
  }

  // coarse accumulations on every other node, anchored like the fine ones
  double sup_n = 0.0, sup_s = 0.0;
  acc = MatrixXd::Zero(e.spec->k, e.cols);
  for (int c = m - 1; c - 2 >= 0; c -= 2) {
    MatrixXd two_step =
        e.lp->step_backward_unstable(e.lo + c - 2) * e.lp->step_backward_unstable(e.lo + c - 1);
    acc = two_step * (acc + h * gN[c]) + h * gN[c - 2];
    double d = e.block_induced(in_fine[c - 2] - acc, true, c - 2) / 3.0;
    sup_n = std::max(sup_n, e.weight(c - 2) * d);
  }
  acc = MatrixXd::Zero(e.spec->dim_stable(), e.cols);
  for (int c = 0; c + 2 < m; c += 2) {
    MatrixXd two_step =
        e.lp->step_forward_stable(e.lo + c + 1) * e.lp->step_forward_stable(e.lo + c);
    acc = two_step * (acc + h * gS[c]) + h * gS[c + 2];
    double d = e.block_induced(js_fine[c + 2] - acc, false, c + 2) / 3.0;
    sup_s = std::max(sup_s, e.weight(c + 2) * d);
  }

  return 2.0 * e.spec->gamma_norm(sup_n, sup_s) / (1.0 - e.theta);
}

double tail_estimate(const Engine& e, double znorm) {
  const double span = (e.hi - e.lo) * e.lp->step();
  if (e.backward) {
    const double a = e.gap->gamma - e.sigma;
    return e.spec->L2 * znorm * std::exp(-a * span) / a / (1.0 - e.theta);
  }
  if (e.spec->L1 <= 0.0) return 0.0;
  const double a = e.sigma - e.gap->rho;
  return e.spec->L1 * znorm * std::exp(-a * span) / a / (1.0 - e.theta);
}

void precheck_tail(const Engine& e) {
  const double span = (e.hi - e.lo) * e.lp->step();
  double a;
  if (e.backward) {
    a = e.gap->gamma - e.sigma;
  } else {
    if (e.spec->L1 <= 0.0) return;
    a = e.sigma - e.gap->rho;
  }
  if (std::exp(-a * span) > e.grid->tail_tol)
    throw TailTooLarge("window truncation tail exp(-" + std::to_string(a) + " * " +
                       std::to_string(span) + ") exceeds tail_tol; increase t_window");
}

PicardRun run_picard(Engine& e, std::vector<MatrixXd> vN, std::vector<MatrixXd> vS) {
  const int m = e.count();
  PicardRun run;
  run.gN.assign(m, MatrixXd());
  run.gS.assign(m, MatrixXd());
  std::vector<MatrixXd> outN(m), outS(m);

  const double tol = e.grid->tol_fixed_point;
  const int max_iters = 5000;
  double prev_inc = -1.0;
  int consecutive_bad = 0;
  bool converged = false;

  for (int iter = 1; iter <= max_iters; ++iter) {
    apply_operator(e, vN, vS, run.gN, run.gS, outN, outS);
    double inc = 0.0;
    for (int c = 0; c < m; ++c)
      inc = std::max(inc, e.weight(c) * e.node_norm(c, outN[c] - vN[c], outS[c] - vS[c]));
    vN.swap(outN);
    vS.swap(outS);
    run.diag.iterations = iter;
    run.diag.last_increment = inc;

    double znorm = weighted_norm_of(e, vN, vS);
    run.diag.weighted_norm = znorm;
    const double floor = 1e3 * DBL_EPSILON * std::max(1.0, znorm);

    if (prev_inc > floor && inc > floor) {
      double ratio = inc / prev_inc;
      run.diag.ratios.push_back(ratio);
      if (ratio > e.theta + 0.05) {
        if (++consecutive_bad >= 3)
          throw NonContraction("increment ratio " + std::to_string(ratio) +
                               " above theta* + 0.05 for 3 consecutive sweeps");
      } else {
        consecutive_bad = 0;
      }
    }
    prev_inc = inc;

    if (inc <= std::max(tol, floor)) {
      converged = true;
      break;
    }
  }
  if (!converged)
    throw NoConvergence("fixed-point iteration did not reach tolerance within 5000 sweeps");

  // rhs samples of the converged iterate feed the quadrature estimate
  apply_operator(e, vN, vS, run.gN, run.gS, outN, outS);

  run.diag.theta_star = e.theta;
  run.diag.banach_bound = e.theta / (1.0 - e.theta) * run.diag.last_increment;
  run.diag.quadrature_error = quadrature_estimate(e, run.gN, run.gS);
  run.diag.tail_bound = tail_estimate(e, run.diag.weighted_norm);
  run.diag.apost_error =
      run.diag.banach_bound + run.diag.quadrature_error + run.diag.tail_bound;
  run.vN = std::move(vN);
  run.vS = std::move(vS);
  return run;
}

Engine make_engine(const ProblemSpec& spec, const LinearProcess& lp, const GapCertificate& gap,
                   const GridConfig& grid, double tau, bool backward, int cols) {
  if (!(gap.theta_star < 1.0)) throw GapFails("gap certificate has theta* >= 1");
  Engine e;
  e.spec = &spec;
  e.lp = &lp;
  e.gap = &gap;
  e.grid = &grid;
  e.backward = backward;
  e.cols = cols;
  e.tau = tau;
  e.sigma = gap.sigma_star;
  e.theta = gap.theta_star;

  const int anchor = lp.index_of(tau);
  const int steps = std::max(1, static_cast<int>(std::lround(grid.T_window / grid.h)));
  if (backward) {
    e.lo = anchor - steps;
    e.hi = anchor;
    if (e.lo < 0) throw OutOfWindow("backward solve window extends beyond the process grid");
  } else {
    e.lo = anchor;
    e.hi = anchor + steps;
    if (e.hi >= lp.node_count())
      throw OutOfWindow("forward solve window extends beyond the process grid");
  }
  precheck_tail(e);
  return e;
}

void fill_affine_unstable(Engine& e, const MatrixXd& q_data) {
  const int m = e.count();
  const int ns = e.spec->dim_stable();
  MatrixXd w = q_data;  // k x cols
  e.affN.assign(m, MatrixXd());
  e.affS.assign(m, MatrixXd::Zero(ns, e.cols));
  e.affN[m - 1] = w;
  for (int c = m - 2; c >= 0; --c) {
    w = e.lp->step_backward_unstable(e.lo + c) * w;
    e.affN[c] = w;
  }
}

TrajectorySegment assemble_segment(const Engine& e, const PicardRun& run) {
  TrajectorySegment seg;
  seg.tau = e.tau;
  seg.weight_exponent = e.sigma;
  const int m = e.count();
  seg.times.resize(m);
  seg.states.resize(m);
  const int k = e.spec->k, ns = e.spec->dim_stable();
  for (int c = 0; c < m; ++c) {
    seg.times[c] = e.node_time(c);
    VectorXd u(k + ns);
    u.head(k) = run.vN[c].col(0);
    u.tail(ns) = run.vS[c].col(0);
    seg.states[c] = u;
  }
  return seg;
}

}  // namespace

UnstableSolution solve_unstable(const ProblemSpec& spec, const LinearProcess& lp,
                                const GapCertificate& gap, double tau, const VectorXd& eta,
                                const GridConfig& grid) {
  if (eta.size() != spec.n) throw Error("solve_unstable: eta has wrong dimension");
  Engine e = make_engine(spec, lp, gap, grid, tau, true, 1);
  fill_affine_unstable(e, eta.head(spec.k));

  const int m = e.count();
  std::vector<MatrixXd> vN(m), vS(m, MatrixXd::Zero(spec.dim_stable(), 1));
  for (int c = 0; c < m; ++c) vN[c] = e.affN[c];

  PicardRun run = run_picard(e, std::move(vN), std::move(vS));

  UnstableSolution out;
  out.graph_value = run.vS[m - 1].col(0);
  out.diag = run.diag;
  out.segment = assemble_segment(e, run);
  return out;
}

StableSolution solve_stable(const ProblemSpec& spec, const LinearProcess& lp,
                            const GapCertificate& gap, double tau, const VectorXd& eta,
                            const GridConfig& grid) {
  if (eta.size() != spec.n) throw Error("solve_stable: eta has wrong dimension");
  Engine e = make_engine(spec, lp, gap, grid, tau, false, 1);

  const int m = e.count();
  const int k = spec.k, ns = spec.dim_stable();
  e.affN.assign(m, MatrixXd::Zero(k, 1));
  e.affS.assign(m, MatrixXd());
  MatrixXd w = eta.tail(ns);
  e.affS[0] = w;
  for (int c = 1; c < m; ++c) {
    w = e.lp->step_forward_stable(e.lo + c - 1) * w;
    e.affS[c] = w;
  }

  std::vector<MatrixXd> vN(m, MatrixXd::Zero(k, 1)), vS(m);
  for (int c = 0; c < m; ++c) vS[c] = e.affS[c];

  PicardRun run = run_picard(e, std::move(vN), std::move(vS));

  StableSolution out;
  out.graph_value = run.vN[0].col(0);
  out.diag = run.diag;
  out.segment = assemble_segment(e, run);
  return out;
}

DerivativeSolution solve_derivative(const ProblemSpec& spec, const LinearProcess& lp,
                                    const GapCertificate& gap, double tau,
                                    const GridConfig& grid, const TrajectorySegment& base) {
  Engine e = make_engine(spec, lp, gap, grid, tau, true, spec.n);
  const int m = e.count();
  if (static_cast<int>(base.times.size()) != m ||
      std::abs(base.times.front() - e.node_time(0)) > 1e-9 ||
      std::abs(base.times.back() - e.node_time(m - 1)) > 1e-9)
    throw Error("solve_derivative: base segment grid does not match the solve window");

  e.derivative_mode = true;
  e.dfcache.resize(m);
  for (int c = 0; c < m; ++c) e.dfcache[c] = spec.eval_df(base.times[c], base.states[c]);

  const int k = spec.k, ns = spec.dim_stable();
  MatrixXd q_rows(k, spec.n);
  q_rows.setZero();
  q_rows.leftCols(k).setIdentity();
  fill_affine_unstable(e, q_rows);

  std::vector<MatrixXd> vN(m), vS(m, MatrixXd::Zero(ns, spec.n));
  for (int c = 0; c < m; ++c) vN[c] = e.affN[c];

  PicardRun run = run_picard(e, std::move(vN), std::move(vS));

  DerivativeSolution out;
  out.d_graph = run.vS[m - 1];  // stable rows of Z(tau) - Q
  out.diag = run.diag;
  out.segment.tau = tau;
  out.segment.weight_exponent = e.sigma;
  out.segment.times.resize(m);
  out.segment.states.resize(m);
  for (int c = 0; c < m; ++c) {
    out.segment.times[c] = e.node_time(c);
    MatrixXd z(spec.n, spec.n);
    z.topRows(k) = run.vN[c];
    z.bottomRows(ns) = run.vS[c];
    out.segment.states[c] = z;
  }
  return out;
}

double unstable_residual(const ProblemSpec& spec, const LinearProcess& lp,
                         const GapCertificate& gap, double tau, const VectorXd& eta,
                         const GridConfig& grid, const TrajectorySegment& segment) {
  Engine e = make_engine(spec, lp, gap, grid, tau, true, 1);
  fill_affine_unstable(e, eta.head(spec.k));
  const int m = e.count();
  if (static_cast<int>(segment.times.size()) != m)
    throw Error("unstable_residual: segment grid does not match the solve window");

  std::vector<MatrixXd> vN(m), vS(m), gN(m), gS(m), outN(m), outS(m);
  for (int c = 0; c < m; ++c) {
    vN[c] = segment.states[c].head(spec.k);
    vS[c] = segment.states[c].tail(spec.dim_stable());
  }
  apply_operator(e, vN, vS, gN, gS, outN, outS);
  double inc = 0.0;
  for (int c = 0; c < m; ++c)
    inc = std::max(inc, e.weight(c) * e.node_norm(c, outN[c] - vN[c], outS[c] - vS[c]));
  return inc;
}

ManifoldChart sample_chart(const ProblemSpec& spec, const LinearProcess& lp,
                           const GapCertificate& gap, double tau,
                           const std::vector<VectorXd>& base_points, const GridConfig& grid) {
  ManifoldChart chart;
  chart.tau = tau;
  chart.points.resize(base_points.size());

  auto solve_point = [&](std::size_t idx) {
    ChartPoint& pt = chart.points[idx];
    pt.q = base_points[idx];
    try {
      VectorXd eta = VectorXd::Zero(spec.n);
      eta.head(spec.k) = base_points[idx];
      UnstableSolution sol = solve_unstable(spec, lp, gap, tau, eta, grid);
      pt.graph = sol.graph_value;
      pt.diag = sol.diag;
    } catch (const Error& err) {
      pt.error = err.what();
    }
  };

  if (base_points.size() > 4) {
    std::vector<std::future<void>> futures;
    futures.reserve(base_points.size());
    for (std::size_t i = 0; i < base_points.size(); ++i)
      futures.push_back(std::async(std::launch::async, solve_point, i));
    for (auto& f : futures) f.get();
  } else {
    for (std::size_t i = 0; i < base_points.size(); ++i) solve_point(i);
  }

  // chart invariants: zero preservation and the pairwise Lipschitz bound
  for (const auto& pt : chart.points) {
    if (!pt.ok()) continue;
    if (vec_norm(pt.q, spec.ambient) == 0.0) {
      double s = vec_norm(pt.graph, spec.ambient);
      if (s > std::max(10.0 * grid.tol_fixed_point, pt.diag.apost_error))
        chart.violations.push_back("graph value at q=0 is " + std::to_string(s));
    }
  }
  for (std::size_t i = 0; i < chart.points.size(); ++i) {
    for (std::size_t j = i + 1; j < chart.points.size(); ++j) {
      const auto& a = chart.points[i];
      const auto& b = chart.points[j];
      if (!a.ok() || !b.ok()) continue;
      double dq = lp.unstable_norm(tau, a.q - b.q, gap.rho).value;
      if (dq == 0.0) continue;  // identical base points: skipped pair
      double ds = lp.stable_norm(tau, a.graph - b.graph, gap.gamma).value;
      chart.max_lipschitz_ratio = std::max(chart.max_lipschitz_ratio, ds / dq);
      double allowance = 2.0 * (a.diag.apost_error + b.diag.apost_error);
      if (ds > gap.kappa_sigma * dq + allowance)
        chart.violations.push_back("pairwise Lipschitz bound violated: |dSigma|=" +
                                   std::to_string(ds) + " vs kappa_sigma*|dq|=" +
                                   std::to_string(gap.kappa_sigma * dq));
    }
  }
  return chart;
}

ManifoldSystem::ManifoldSystem(ProblemSpec spec, GridConfig grid)
    : spec_(std::move(spec)), grid_(grid), gap_(make_gap_certificate(spec_)) {
  ensure_valid(spec_, grid_);
}

LinearProcess ManifoldSystem::make_process(double anchor) const {
  return LinearProcess::build(spec_, anchor, grid_);
}

LinearProcess ManifoldSystem::make_process(double anchor, double back_span,
                                           double fwd_span) const {
  return LinearProcess::build(spec_, anchor, grid_, back_span, fwd_span);
}

UnstableSolution ManifoldSystem::solve_graph_point(double tau, const VectorXd& eta) const {
  LinearProcess lp = make_process(tau);
  return solve_unstable(spec_, lp, gap_, tau, eta, grid_);
}

StableSolution ManifoldSystem::solve_stable_point(double tau, const VectorXd& eta) const {
  LinearProcess lp = make_process(tau, grid_.T_norm, grid_.T_window + grid_.T_norm);
  return solve_stable(spec_, lp, gap_, tau, eta, grid_);
}

DerivativeSolution ManifoldSystem::solve_graph_derivative(double tau, const VectorXd& eta) const {
  LinearProcess lp = make_process(tau);
  UnstableSolution base = solve_unstable(spec_, lp, gap_, tau, eta, grid_);
  return solve_derivative(spec_, lp, gap_, tau, grid_, base.segment);
}

ManifoldChart ManifoldSystem::chart(double tau, const std::vector<VectorXd>& base_points) const {
  LinearProcess lp = make_process(tau);
  return sample_chart(spec_, lp, gap_, tau, base_points, grid_);
}

}  // namespace lpm
