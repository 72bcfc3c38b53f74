#pragma once

#include "lpm/problem.hpp"

namespace lpm {

/// All scalar constants derived from the gap condition
/// Γ(L1/(σ−ρ), L2/(γ−σ)) < 1: the minimizing σ*, the contraction factor θ*,
/// the cone constant κ, the refined Lipschitz constants of the two graphs,
/// and the attraction exponent ω.
struct GapCertificate {
  double gamma = 0.0, rho = 0.0, L1 = 0.0, L2 = 0.0;
  AdmissibleNorm gnorm;

  double sigma_star = 0.0;
  double theta_star = 0.0;
  double kappa = 0.0;  // +inf when L1 == 0 (iteration seed only)
  double kappa_sigma = 0.0;
  double kappa_theta = 0.0;
  double omega = 0.0;
  bool inertial = false;

  double theta_at(double sigma) const;
};

/// Contraction factor Γ(L1/(σ−ρ), L2/(γ−σ)).
double gap_theta(double gamma, double rho, double L1, double L2, const AdmissibleNorm& gnorm,
                 double sigma);

struct SigmaChoice {
  double sigma_star;
  double theta_star;
};

/// Minimizes θ(σ) over σ ∈ (ρ,γ): 256-point bracketing grid followed by
/// golden-section refinement. Throws GapFails when the minimum is not
/// strictly below 1.
SigmaChoice find_sigma(double gamma, double rho, double L1, double L2,
                       const AdmissibleNorm& gnorm);

/// Smallest fixed point of κ ↦ L2·Γ(1,κ)/(γ−ρ−L1·Γ(1,κ)), iterated from 0;
/// the optimal Lipschitz constant of the invariant graph.
double refine_kappa_sigma(double gamma, double rho, double L1, double L2,
                          const AdmissibleNorm& gnorm, double seed = 0.0);

/// Smallest fixed point of κ ↦ L1·Γ(κ,1)/(γ−ρ−L2·Γ(κ,1)), iterated from 0;
/// the Lipschitz constant of the stable graph. Identically 0 when L1 = 0.
double refine_kappa_theta(double gamma, double rho, double L1, double L2,
                          const AdmissibleNorm& gnorm, double seed = 0.0);

/// Attraction exponent ω = γ − (γ−ρ)L2Γ(0,1)/(γ−ρ−L1Γ(1,κ_Σ)) ∈ (ρ,γ).
double omega_rate(double gamma, double rho, double L1, double L2, double kappa_sigma,
                  const AdmissibleNorm& gnorm);

GapCertificate make_gap_certificate(double gamma, double rho, double L1, double L2,
                                    const AdmissibleNorm& gnorm);
GapCertificate make_gap_certificate(const ProblemSpec& spec);

}  // namespace lpm
