#include "lpm/dynamics.hpp"

#include <cmath>

#include "lpm/errors.hpp"

namespace lpm {

namespace {

VectorXd rhs(const ProblemSpec& spec, double t, const VectorXd& u) {
  return spec.eval_a(t) * u + spec.eval_f(t, u);
}

VectorXd rk4_state_step(const ProblemSpec& spec, double t, double dt, const VectorXd& u) {
  VectorXd k1 = rhs(spec, t, u);
  VectorXd k2 = rhs(spec, t + 0.5 * dt, u + 0.5 * dt * k1);
  VectorXd k3 = rhs(spec, t + 0.5 * dt, u + 0.5 * dt * k2);
  VectorXd k4 = rhs(spec, t + dt, u + dt * k3);
  return u + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

std::vector<VectorXd> march(const ProblemSpec& spec, double tau, const VectorXd& eta, int steps,
                            double dt) {
  std::vector<VectorXd> states;
  states.reserve(steps + 1);
  states.push_back(eta);
  VectorXd u = eta;
  for (int i = 0; i < steps; ++i) {
    const double pre_norm = vec_norm(u, spec.ambient);
    try {
      u = rk4_state_step(spec, tau + i * dt, dt, u);
    } catch (const expr::EvalDomainError&) {
      // a blow-up can escape to non-finite values inside a single step's
      // stages; report it as the orbit escaping, not as a bad expression
      if (pre_norm > 1e3)
        throw Overflow("state escaped within one step near t=" +
                       std::to_string(tau + i * dt) +
                       "; the nonlinearity is not prepared for this orbit");
      throw;
    }
    if (!u.allFinite() || vec_norm(u, spec.ambient) > 1e12)
      throw Overflow("state norm exceeded 1e12 at t=" + std::to_string(tau + (i + 1) * dt) +
                     "; the nonlinearity is not prepared for this orbit");
    states.push_back(u);
  }
  return states;
}

}  // namespace

VectorXd FlowSample::state_at_time(double t) const {
  if (times.size() < 2) return states.front();
  const double h = times[1] - times[0];
  double rel = (t - times.front()) / h;
  if (rel < -1e-9 || rel > static_cast<double>(times.size()) - 1.0 + 1e-9)
    throw OutOfWindow("time outside the flow sample");
  int i = std::min(static_cast<int>(times.size()) - 2, std::max(0, static_cast<int>(rel)));
  double w = rel - i;
  return (1.0 - w) * states[i] + w * states[i + 1];
}

FlowSample integrate_process(const ProblemSpec& spec, double tau, const VectorXd& eta,
                             double t_end, const GridConfig& grid, const FlowOptions& opts) {
  if (t_end < tau) throw Error("integrate_process requires t_end >= tau");
  const int steps = std::max(1, static_cast<int>(std::lround((t_end - tau) / grid.h)));
  const double dt = (t_end - tau) / steps;

  FlowSample out;
  out.tau = tau;
  out.states = march(spec, tau, eta, steps, dt);
  out.times.resize(steps + 1);
  for (int i = 0; i <= steps; ++i) out.times[i] = tau + i * dt;

  if (opts.estimate_error) {
    auto fine = march(spec, tau, eta, 2 * steps, 0.5 * dt);
    double err = 0.0;
    for (int i = 0; i <= steps; ++i)
      err = std::max(err, vec_norm(out.states[i] - fine[2 * i], spec.ambient));
    out.error_estimate = err * 16.0 / 15.0;
  }

  if (opts.duhamel_check) {
    // residual of T(t,tau)eta = L(t,tau)eta + ∫_tau^t L(t,s) f(s, T(s,tau)eta) ds,
    // with composite Simpson on the stored samples (a trailing trapezoid
    // panel when the interval count is odd)
    const LinearProcess& lp = *opts.duhamel_check;
    double worst = 0.0;
    for (int pick = 1; pick <= 5; ++pick) {
      int idx = (static_cast<int>(out.times.size()) - 1) * pick / 5;
      if (idx < 1) continue;
      double t = out.times[idx];
      VectorXd linear = lp.apply(t, tau, eta, Part::Full);
      auto g = [&](int j) {
        return lp.apply(t, out.times[j], spec.eval_f(out.times[j], out.states[j]), Part::Full);
      };
      VectorXd integral = VectorXd::Zero(spec.n);
      int even_end = idx - (idx % 2);
      for (int j = 0; j + 2 <= even_end; j += 2)
        integral += (dt / 3.0) * (g(j) + 4.0 * g(j + 1) + g(j + 2));
      if (idx % 2 == 1) integral += (dt / 2.0) * (g(idx - 1) + g(idx));
      double scale = std::max(1.0, vec_norm(out.states[idx], spec.ambient));
      worst = std::max(worst,
                       vec_norm(out.states[idx] - linear - integral, spec.ambient) / scale);
    }
    out.duhamel_residual = worst;
  }
  return out;
}

FlowSample integrate_backward(const ProblemSpec& spec, double tau, const VectorXd& eta,
                              double t_begin, const GridConfig& grid) {
  if (t_begin > tau) throw Error("integrate_backward requires t_begin <= tau");
  const int steps = std::max(1, static_cast<int>(std::lround((tau - t_begin) / grid.h)));
  const double dt = -(tau - t_begin) / steps;

  FlowSample out;
  out.tau = tau;
  out.states = march(spec, tau, eta, steps, dt);
  out.times.resize(steps + 1);
  for (int i = 0; i <= steps; ++i) out.times[i] = tau + i * dt;
  return out;
}

VectorXd project_graph(const ManifoldSystem& sys, double t, const VectorXd& x) {
  UnstableSolution sol = sys.solve_graph_point(t, x);
  VectorXd out(x.size());
  out.head(sys.spec().k) = x.head(sys.spec().k);
  out.tail(sys.spec().dim_stable()) = sol.graph_value;
  return out;
}

VectorXd project_stable(const ManifoldSystem& sys, double t, const VectorXd& x) {
  StableSolution sol = sys.solve_stable_point(t, x);
  VectorXd out(x.size());
  out.head(sys.spec().k) = sol.graph_value;
  out.tail(sys.spec().dim_stable()) = x.tail(sys.spec().dim_stable());
  return out;
}

}  // namespace lpm
