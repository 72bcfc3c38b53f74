#include "lpm/linear_process.hpp"

#include <Eigen/LU>
#include <cmath>
#include <deque>
#include <functional>

#include "lpm/errors.hpp"

namespace lpm {

namespace {

// One RK4 step of the matrix equation M' = A(t)M from M = I over [t, t+dt]
// (dt may be negative).
MatrixXd rk4_step(const std::function<MatrixXd(double)>& a, double t, double dt, int dim) {
  const MatrixXd eye = MatrixXd::Identity(dim, dim);
  MatrixXd k1 = a(t);
  MatrixXd k2 = a(t + 0.5 * dt) * (eye + 0.5 * dt * k1);
  MatrixXd k3 = a(t + 0.5 * dt) * (eye + 0.5 * dt * k2);
  MatrixXd k4 = a(t + dt) * (eye + dt * k3);
  return eye + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

double cond_estimate(const MatrixXd& m) {
  if (m.rows() == 1) return 1.0;
  Eigen::PartialPivLU<MatrixXd> lu(m);
  MatrixXd inv = lu.inverse();
  return op_norm(m, AmbientNorm::Max) * op_norm(inv, AmbientNorm::Max);
}

}  // namespace

LinearProcess LinearProcess::build(const ProblemSpec& spec, double tau, const GridConfig& grid) {
  return build(spec, tau, grid, grid.T_window + grid.T_norm, grid.T_norm);
}

LinearProcess LinearProcess::build(const ProblemSpec& spec, double tau, const GridConfig& grid,
                                   double back_span, double fwd_span) {
  grid.validate();
  LinearProcess lp;
  lp.tau_ = tau;
  lp.h_ = grid.h;
  lp.k_ = spec.k;
  lp.ns_ = spec.dim_stable();
  lp.gamma_ = spec.gamma;
  lp.rho_ = spec.rho;
  lp.ambient_ = spec.ambient;
  lp.wnorm_ = std::max(1, static_cast<int>(std::lround(grid.T_norm / grid.h)));

  const int nb = std::max(1, static_cast<int>(std::lround(back_span / grid.h)));
  const int nf = std::max(1, static_cast<int>(std::lround(fwd_span / grid.h)));
  const int count = nb + nf + 1;
  lp.anchor_ = nb;

  lp.times_.resize(count);
  for (int i = 0; i < count; ++i) lp.times_[i] = tau + (i - nb) * grid.h;

  auto aN = [&spec](double t) { return spec.eval_a_unstable(t); };
  auto aS = [&spec](double t) { return spec.eval_a_stable(t); };

  lp.sN_bwd_.resize(count - 1);
  lp.sN_fwd_.resize(count - 1);
  lp.sS_fwd_.resize(count - 1);
  lp.sS_bwd_.resize(count - 1);
  for (int i = 0; i < count - 1; ++i) {
    // primary directions: unstable backward, stable forward
    lp.sN_bwd_[i] = rk4_step(aN, lp.times_[i + 1], -grid.h, lp.k_);
    lp.sS_fwd_[i] = rk4_step(aS, lp.times_[i], grid.h, lp.ns_);
    lp.sN_fwd_[i] = lp.sN_bwd_[i].partialPivLu().inverse();
    lp.sS_bwd_[i] = lp.sS_fwd_[i].partialPivLu().inverse();
  }

  lp.phiN_.resize(count);
  lp.phiS_.resize(count);
  lp.phiN_[nb] = MatrixXd::Identity(lp.k_, lp.k_);
  lp.phiS_[nb] = MatrixXd::Identity(lp.ns_, lp.ns_);
  for (int i = nb; i > 0; --i) {
    lp.phiN_[i - 1] = lp.sN_bwd_[i - 1] * lp.phiN_[i];
    lp.phiS_[i - 1] = lp.sS_bwd_[i - 1] * lp.phiS_[i];
  }
  for (int i = nb; i < count - 1; ++i) {
    lp.phiN_[i + 1] = lp.sN_fwd_[i] * lp.phiN_[i];
    lp.phiS_[i + 1] = lp.sS_fwd_[i] * lp.phiS_[i];
  }

  for (int i = 0; i < count; ++i) {
    if (cond_estimate(lp.phiN_[i]) > 1e12 || cond_estimate(lp.phiS_[i]) > 1e12)
      throw IllConditioned("fundamental block condition number exceeds 1e12 at t=" +
                           std::to_string(lp.times_[i]));
  }

  lp.build_norm_scales();
  return lp;
}

void LinearProcess::build_norm_scales() {
  if (!scalar_blocks()) return;
  const int count = node_count();
  cN_.assign(count, 1.0);
  cS_.assign(count, 1.0);
  cNb_.assign(count, 0);
  cSb_.assign(count, 0);
  aN_.assign(count, 0);
  aS_.assign(count, 0);

  // |x|_{N(t_i)} = cN[i]·|x| with cN[i] = max_{j in [i-w, i]} of the
  // log-space evidence lgN[j] - lgN[i], lgN[j] = rho(t_j - tau) + log|phiN_j|;
  // sliding-window maxima via a monotone deque, ties resolving toward the
  // anchor node so exactly flat evidence is not flagged as boundary-attained.
  std::vector<double> lgN(count), lgS(count);
  for (int i = 0; i < count; ++i) {
    lgN[i] = rho_ * (times_[i] - tau_) + std::log(std::abs(phiN_[i](0, 0)));
    lgS[i] = gamma_ * (times_[i] - tau_) + std::log(std::abs(phiS_[i](0, 0)));
  }

  std::deque<int> dq;
  for (int i = 0; i < count; ++i) {
    while (!dq.empty() && lgN[dq.back()] <= lgN[i]) dq.pop_back();
    dq.push_back(i);
    while (dq.front() < i - wnorm_) dq.pop_front();
    const int arg = dq.front();
    const double diff = lgN[arg] - lgN[i];
    cN_[i] = diff <= 0.0 ? 1.0 : std::exp(diff);
    aN_[i] = arg;
    const int lo = std::max(0, i - wnorm_);
    cNb_[i] = (arg == lo && lo < i && diff > 1e-6) ? 1 : 0;
  }

  dq.clear();
  for (int i = count - 1; i >= 0; --i) {
    while (!dq.empty() && lgS[dq.back()] <= lgS[i]) dq.pop_back();
    dq.push_back(i);
    while (dq.front() > i + wnorm_) dq.pop_front();
    const int arg = dq.front();
    const double diff = lgS[arg] - lgS[i];
    cS_[i] = diff <= 0.0 ? 1.0 : std::exp(diff);
    aS_[i] = arg;
    const int hi = std::min(count - 1, i + wnorm_);
    cSb_[i] = (arg == hi && hi > i && diff > 1e-6) ? 1 : 0;
  }
}

int LinearProcess::index_of(double t) const {
  const double rel = (t - times_.front()) / h_;
  const int i = static_cast<int>(std::lround(rel));
  if (i < 0 || i >= node_count() || std::abs(times_[i] - t) > 1e-9 * std::max(1.0, std::abs(t)))
    throw OutOfWindow("time " + std::to_string(t) + " is not a grid node of this process window");
  return i;
}

namespace {

MatrixXd interp(const std::vector<MatrixXd>& phi, const std::vector<double>& times, double h,
                double t) {
  const double rel = (t - times.front()) / h;
  if (rel < -1e-9 || rel > times.size() - 1 + 1e-9)
    throw OutOfWindow("time " + std::to_string(t) + " outside the process window");
  int i = std::min(static_cast<int>(times.size()) - 2, std::max(0, static_cast<int>(rel)));
  double w = rel - i;
  if (w < 1e-12) return phi[i];
  if (w > 1.0 - 1e-12) return phi[i + 1];
  return (1.0 - w) * phi[i] + w * phi[i + 1];
}

}  // namespace

VectorXd LinearProcess::apply(double t, double s, const VectorXd& x, Part part) const {
  switch (part) {
    case Part::Unstable: {
      MatrixXd mt = interp(phiN_, times_, h_, t);
      MatrixXd ms = interp(phiN_, times_, h_, s);
      return mt * ms.partialPivLu().solve(x);
    }
    case Part::Stable: {
      MatrixXd mt = interp(phiS_, times_, h_, t);
      MatrixXd ms = interp(phiS_, times_, h_, s);
      return mt * ms.partialPivLu().solve(x);
    }
    case Part::Full: {
      VectorXd out(k_ + ns_);
      out.head(k_) = apply(t, s, x.head(k_), Part::Unstable);
      out.tail(ns_) = apply(t, s, x.tail(ns_), Part::Stable);
      return out;
    }
  }
  throw Error("unreachable");
}

LinearProcess::NormValue LinearProcess::unstable_norm(double theta, const VectorXd& xN,
                                                      double rho) const {
  const int i = index_of(theta);
  if (scalar_blocks() && rho == rho_) {
    return {cN_[i] * std::abs(xN[0]), times_[aN_[i]], cNb_[i] != 0};
  }
  const int lo = std::max(0, i - wnorm_);
  const int stride = std::max(1, (i - lo) / 128);
  Eigen::PartialPivLU<MatrixXd> lu(phiN_[i]);
  VectorXd y = lu.solve(xN);
  double best = vec_norm(xN, ambient_);
  int arg = i;
  for (int j = i - stride; j >= lo; j -= stride) {
    double v = std::exp(rho * (j - i) * h_) * vec_norm(phiN_[j] * y, ambient_);
    if (v > best) {
      best = v;
      arg = j;
    }
  }
  if (arg != lo && lo != i) {  // always sample the window edge
    double v = std::exp(rho * (lo - i) * h_) * vec_norm(phiN_[lo] * y, ambient_);
    if (v > best) {
      best = v;
      arg = lo;
    }
  }
  const double base = vec_norm(xN, ambient_);
  return {best, times_[arg], arg == lo && lo < i && best > base * (1.0 + 1e-6)};
}

LinearProcess::NormValue LinearProcess::stable_norm(double theta, const VectorXd& xS,
                                                    double gamma) const {
  const int i = index_of(theta);
  if (scalar_blocks() && gamma == gamma_) {
    return {cS_[i] * std::abs(xS[0]), times_[aS_[i]], cSb_[i] != 0};
  }
  const int hi = std::min(node_count() - 1, i + wnorm_);
  const int stride = std::max(1, (hi - i) / 128);
  Eigen::PartialPivLU<MatrixXd> lu(phiS_[i]);
  VectorXd y = lu.solve(xS);
  double best = vec_norm(xS, ambient_);
  int arg = i;
  for (int j = i + stride; j <= hi; j += stride) {
    double v = std::exp(gamma * (j - i) * h_) * vec_norm(phiS_[j] * y, ambient_);
    if (v > best) {
      best = v;
      arg = j;
    }
  }
  if (arg != hi && hi != i) {
    double v = std::exp(gamma * (hi - i) * h_) * vec_norm(phiS_[hi] * y, ambient_);
    if (v > best) {
      best = v;
      arg = hi;
    }
  }
  const double base = vec_norm(xS, ambient_);
  return {best, times_[arg], arg == hi && hi > i && best > base * (1.0 + 1e-6)};
}

double LinearProcess::moving_norm(double theta, const VectorXd& x,
                                  const AdmissibleNorm& gnorm) const {
  return gnorm(unstable_norm(theta, x.head(k_), rho_).value,
               stable_norm(theta, x.tail(ns_), gamma_).value);
}

NormSystem process_norm_system(const LinearProcess& lp, const AdmissibleNorm& gnorm) {
  auto snap = [&lp](double t) {
    double rel = (t - lp.time_at(0)) / lp.step();
    int i = std::max(0, std::min(lp.node_count() - 1, static_cast<int>(std::lround(rel))));
    return lp.time_at(i);
  };
  NormSystem sys;
  sys.unstable = [&lp, snap](double t, const VectorXd& x) {
    return lp.unstable_norm(snap(t), x, lp.declared_rho()).value;
  };
  sys.stable = [&lp, snap](double t, const VectorXd& x) {
    return lp.stable_norm(snap(t), x, lp.declared_gamma()).value;
  };
  sys.moving = [&lp, snap, gnorm](double t, const VectorXd& x) {
    return lp.moving_norm(snap(t), x, gnorm);
  };
  return sys;
}

SplittingCertificate certify_splitting(const LinearProcess& lp, double gamma, double rho) {
  if (!(gamma > rho)) throw Error("certify_splitting requires gamma > rho");

  SplittingCertificate cert;
  cert.gamma = gamma;
  cert.rho = rho;

  const int a = lp.anchor_index();
  const double tau = lp.anchor();
  for (int i = a; i < lp.node_count(); ++i) {
    double t = lp.time_at(i);
    double v = std::exp(gamma * (t - tau)) * op_norm(lp.phi_stable(i), lp.ambient());
    cert.evidence.stable_times.push_back(t);
    cert.evidence.stable_values.push_back(v);
  }
  for (int i = a; i >= 0; --i) {
    double t = lp.time_at(i);
    double v = std::exp(rho * (t - tau)) * op_norm(lp.phi_unstable(i), lp.ambient());
    cert.evidence.unstable_times.push_back(t);
    cert.evidence.unstable_values.push_back(v);
  }

  auto plateau_or_throw = [](const std::vector<double>& v, const char* which) {
    const int m = static_cast<int>(v.size());
    double mx = 0.0;
    for (double x : v) mx = std::max(mx, x);
    if (m < 8) return mx;
    const int q = (3 * m) / 4;
    double max_head = 0.0, max_tail = 0.0;
    for (int i = 0; i < q; ++i) max_head = std::max(max_head, v[i]);
    for (int i = q; i < m; ++i) max_tail = std::max(max_tail, v[i]);
    if (max_tail > 1.01 * max_head)
      throw NotSplit(std::string("splitting evidence (") + which +
                     " part) grows without plateau: requested exponents not certified");
    return mx;
  };

  double ms = plateau_or_throw(cert.evidence.stable_values, "stable");
  double mn = plateau_or_throw(cert.evidence.unstable_values, "unstable");
  cert.M = std::max(ms, mn);
  return cert;
}

}  // namespace lpm
