#pragma once

#include <vector>

#include "sgdflow/observables.hpp"
#include "sgdflow/spectrum.hpp"
#include "sgdflow/stepsize.hpp"
#include "sgdflow/trajectory.hpp"

namespace sgdflow {

// Initial overlap statistics for the iterate/signal pair. For isotropic
// random vectors the cross terms vanish and every mode starts from the same
// 2x2 matrix; powerlaw_residual localizes the initial residual per mode as
// D_i^2(0) = lambda_i^(-delta).
enum class InitKind {
  zero_start,         // X0 = 0, ||X*||^2 = scale_star_sq
  gaussian_both,      // independent X0, X* with ||X0||^2, ||X*||^2 given
  powerlaw_residual,  // X0 = 0, D_i^2(0) = lambda_i^(-delta)
  ones_star,          // X0 = 0, X* = 1/sqrt(d)
  explicit_overlaps,  // one (v11, v12, v22) applied to every mode
};

struct InitSpec {
  InitKind kind = InitKind::zero_start;
  double scale0_sq = 0.0;
  double scale_star_sq = 1.0;
  double delta = 0.0;
  double v11 = 0.0, v12 = 0.0, v22 = 0.0;

  static InitSpec zero_start(double scale_star_sq = 1.0);
  static InitSpec gaussian_both(double scale0_sq, double scale_star_sq);
  static InitSpec powerlaw_residual(double delta);
  static InitSpec ones_star();
  static InitSpec explicit_overlaps(double v11, double v12, double v22);
};

// Per-eigenmode 2x2 overlap matrix; v22 is constant in time (the signal row
// never moves).
struct ModeState {
  double lambda = 0.0;
  double weight = 0.0;
  double v11 = 0.0;
  double v12 = 0.0;
  double v22 = 0.0;

  double d2() const { return v11 - 2.0 * v12 + v22; }
};

std::vector<ModeState> init_modes(const Spectrum& spectrum, const InitSpec& init);

// Right-hand side of one mode's ODE given the instantaneous learning rate,
// risk-gradient entries and Fisher value. dv22 is identically zero.
struct ModeDerivative {
  double dv11 = 0.0;
  double dv12 = 0.0;
};

ModeDerivative mode_derivative(const ModeState& mode, double gamma, double h1, double h2,
                               double fisher);

// Integrates the coupled mode ODEs together with the rule-internal state by
// classical fixed-step RK4, re-evaluating gamma and grad h at every
// substage. Records every record_every time units plus the final time.
Trajectory solve_detflow(const RiskModel& model, const Spectrum& spectrum,
                         const StepsizeRule& rule, const InitSpec& init, double t_end,
                         double dt, double record_every);

// Observables of the flow at a given mode configuration (used by tests and
// by the solver itself; gamma is left at zero).
Observables observables_of(const RiskModel& model, const Spectrum& spectrum,
                           const std::vector<ModeState>& modes);

// Closed scalar reduction for identity covariance under AdaGrad-Norm on
// noiseless least squares: integrates (R, int R) with
// dR/dt = eta^2 R / (b^2 + 2 int R) - 2 eta R / sqrt(b^2 + 2 int R).
Trajectory scalar_identity_risk(double b, double eta, double t_end, double dt, double r0,
                                double record_every);

}  // namespace sgdflow
