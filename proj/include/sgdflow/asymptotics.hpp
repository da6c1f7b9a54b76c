#pragma once

#include <string>

#include "sgdflow/trajectory.hpp"

namespace sgdflow {

// Limiting line-search rate when the spectrum takes two values
// lambda1 >= lambda2 > 0 with equal multiplicity: the closed-form radical
// expression, cross-checked against the positive root of the quadratic
//   P(x) = l1 l2 (x+1)(l2 x - l1) + (l2 - l1)^3 x
// through gamma = 2 (l1^2 + l2^2 x) / ((l1 + l2 x)(l1^2 + l2^2)).
double line_search_limit(double lambda1, double lambda2);

// The two routes separately (exposed for the agreement property).
double line_search_limit_radical(double lambda1, double lambda2);
double line_search_limit_via_root(double lambda1, double lambda2);

// Bracket for the limiting AdaGrad-Norm rate on noiseless least squares
// when avg_eig <= b/eta. The central value is the formula as published;
// lower/upper come from the bounds on the reparameterized risk mass
// ||r||_1 in [D2_0/4, (D2_0/4)/(1 - gamma0 avg_eig / 2)].
struct AdagradLimitBracket {
  bool available = false;
  std::string reason;
  double lower = 0.0;
  double central = 0.0;
  double upper = 0.0;
};

AdagradLimitBracket adagrad_limit_bracket(double b, double eta, double avg_eig, double d2_0,
                                          double gamma0);

// Power-law regime classification for spectrum exponent beta and residual
// exponent delta. Exponents follow the three-phase table; the critical
// phase carries logarithmic corrections noted in the descriptors.
enum class PowerLawRegime { fast, critical, slow };

struct PowerLawRates {
  double beta = 0.0;
  double delta = 0.0;
  PowerLawRegime regime = PowerLawRegime::fast;
  double risk_exponent = 0.0;
  double gamma_exponent = 0.0;
  std::string risk_descriptor;
  std::string gamma_descriptor;
};

PowerLawRates power_law_rates(double beta, double delta);

struct KappaPair {
  double kappa1 = 0.0;  // 2 - beta - delta
  double kappa2 = 0.0;  // 3 - beta
};

KappaPair kappa_exponents(double beta, double delta);

// Guaranteed lower bound on the limiting AdaGrad-Norm rate for an
// L-smooth outer function satisfying the restricted secant inequality,
// started at gamma0 = eta/b = 2 mu zeta / (L^2 avg_eig), zeta in (0,1).
struct StronglyConvexBound {
  double primary = 0.0;   // gamma0 eta^2 / (1 + zeta/(1-zeta) D2_0)
  double expanded = 0.0;  // eta^2 / (b/eta + avg_eig L^2 / (2 mu (1-zeta)) D2_0)
};

StronglyConvexBound strongly_convex_lower_bound(double mu_hat, double l_hat, double avg_eig,
                                                double eta, double b, double zeta, double d2_0);

// Long-time AdaGrad-Norm rate under label noise:
// eta / sqrt(b^2 + omega^2 avg_eig t).
double noisy_adagrad_asymptote(double b, double eta, double omega, double avg_eig, double t);

// Ordinary least squares slope of log(field) against log(t) over records
// with t in [t_lo, t_hi]. field: 0 = risk, 1 = gamma. Requires at least
// eight records in the window.
double fit_loglog_slope(const Trajectory& traj, int field, double t_lo, double t_hi);

}  // namespace sgdflow
