#include "lpm/gap.hpp"

#include <cmath>
#include <limits>

#include "lpm/errors.hpp"

namespace lpm {

double gap_theta(double gamma, double rho, double L1, double L2, const AdmissibleNorm& gnorm,
                 double sigma) {
  return gnorm(L1 / (sigma - rho), L2 / (gamma - sigma));
}

double GapCertificate::theta_at(double sigma) const {
  return gap_theta(gamma, rho, L1, L2, gnorm, sigma);
}

SigmaChoice find_sigma(double gamma, double rho, double L1, double L2,
                       const AdmissibleNorm& gnorm) {
  if (!(gamma > rho)) throw Error("find_sigma requires gamma > rho");
  if (!(L2 > 0.0) || L1 < 0.0) throw Error("find_sigma requires L1 >= 0, L2 > 0");

  auto theta = [&](double s) { return gap_theta(gamma, rho, L1, L2, gnorm, s); };

  // bracketing grid on the open interval
  const int grid_points = 256;
  const double span = gamma - rho;
  int best = 1;
  double best_val = std::numeric_limits<double>::infinity();
  for (int j = 1; j <= grid_points; ++j) {
    double s = rho + span * j / (grid_points + 1);
    double v = theta(s);
    if (v < best_val) {
      best_val = v;
      best = j;
    }
  }

  double lo = rho + span * std::max(1, best - 1) / (grid_points + 1);
  double hi = rho + span * std::min(grid_points, best + 1) / (grid_points + 1);

  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - gr * (hi - lo);
  double x2 = lo + gr * (hi - lo);
  double f1 = theta(x1), f2 = theta(x2);
  while (hi - lo > 1e-13 * span) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - gr * (hi - lo);
      f1 = theta(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + gr * (hi - lo);
      f2 = theta(x2);
    }
  }
  double sigma_star = 0.5 * (lo + hi);
  double theta_star = theta(sigma_star);
  if (f1 < theta_star) {
    sigma_star = x1;
    theta_star = f1;
  }
  if (f2 < theta_star) {
    sigma_star = x2;
    theta_star = f2;
  }

  if (!(theta_star < 1.0 - 1e-12))
    throw GapFails("gap condition fails: min over sigma of Gamma(L1/(sigma-rho), L2/(gamma-sigma)) = " +
                   std::to_string(theta_star) + " >= 1");
  return {sigma_star, theta_star};
}

namespace {

double iterate_to_fixed_point(const std::function<double(double)>& g, double seed,
                              const char* what) {
  double x = seed;
  for (int it = 0; it < 10000; ++it) {
    double next = g(x);
    if (!(next >= 0.0) || !std::isfinite(next))
      throw NoConvergence(std::string(what) + ": iteration left [0, inf)");
    if (std::abs(next - x) <= 1e-13) return next;
    x = next;
  }
  throw NoConvergence(std::string(what) + ": no convergence within 10^4 iterations");
}

}  // namespace

double refine_kappa_sigma(double gamma, double rho, double L1, double L2,
                          const AdmissibleNorm& gnorm, double seed) {
  const double span = gamma - rho;
  auto g = [&](double kappa) {
    double den = span - L1 * gnorm(1.0, kappa);
    if (den <= 0.0) return std::numeric_limits<double>::quiet_NaN();
    return L2 * gnorm(1.0, kappa) / den;
  };
  double ks = iterate_to_fixed_point(g, seed, "kappa_sigma refinement");

  // defining equation: gamma - rho = L1 Γ(1,κ_Σ) + L2 Γ(1/κ_Σ, 1)
  double residual = std::abs(span - L1 * gnorm(1.0, ks) - L2 * gnorm(1.0 / ks, 1.0));
  if (residual > 1e-10 * std::max(1.0, span))
    throw NoConvergence("kappa_sigma residual " + std::to_string(residual) + " exceeds 1e-10");
  return ks;
}

double refine_kappa_theta(double gamma, double rho, double L1, double L2,
                          const AdmissibleNorm& gnorm, double seed) {
  const double span = gamma - rho;
  auto g = [&](double kappa) {
    double den = span - L2 * gnorm(kappa, 1.0);
    if (den <= 0.0) return std::numeric_limits<double>::quiet_NaN();
    return L1 * gnorm(kappa, 1.0) / den;
  };
  double kt = iterate_to_fixed_point(g, seed, "kappa_theta refinement");

  if (kt > 0.0) {
    double residual = std::abs(span - L1 * gnorm(1.0, 1.0 / kt) - L2 * gnorm(kt, 1.0));
    if (residual > 1e-10 * std::max(1.0, span))
      throw NoConvergence("kappa_theta residual " + std::to_string(residual) + " exceeds 1e-10");
  }
  return kt;
}

double omega_rate(double gamma, double rho, double L1, double L2, double kappa_sigma,
                  const AdmissibleNorm& gnorm) {
  const double span = gamma - rho;
  double omega = gamma - span * L2 * gnorm(0.0, 1.0) / (span - L1 * gnorm(1.0, kappa_sigma));
  if (!(omega > rho - 1e-12) || !(omega < gamma + 1e-12))
    throw Error("omega outside (rho, gamma): " + std::to_string(omega));
  return omega;
}

GapCertificate make_gap_certificate(double gamma, double rho, double L1, double L2,
                                    const AdmissibleNorm& gnorm) {
  GapCertificate cert;
  cert.gamma = gamma;
  cert.rho = rho;
  cert.L1 = L1;
  cert.L2 = L2;
  cert.gnorm = gnorm;

  auto [sigma, theta] = find_sigma(gamma, rho, L1, L2, gnorm);
  cert.sigma_star = sigma;
  cert.theta_star = theta;
  cert.kappa = L1 > 0.0 ? (L2 / L1) * (sigma - rho) / (gamma - sigma)
                        : std::numeric_limits<double>::infinity();
  cert.kappa_sigma = refine_kappa_sigma(gamma, rho, L1, L2, gnorm);
  cert.kappa_theta = refine_kappa_theta(gamma, rho, L1, L2, gnorm);
  cert.omega = omega_rate(gamma, rho, L1, L2, cert.kappa_sigma, gnorm);
  cert.inertial = cert.omega > 0.0;
  return cert;
}

GapCertificate make_gap_certificate(const ProblemSpec& spec) {
  return make_gap_certificate(spec.gamma, spec.rho, spec.L1, spec.L2, spec.gamma_norm);
}

}  // namespace lpm
