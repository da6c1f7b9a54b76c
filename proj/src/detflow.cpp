#include "sgdflow/detflow.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace sgdflow {

namespace {

constexpr double kPsdStepTol = 1e-8;
constexpr double kD2Tol = 1e-10;

std::string fmt_meta(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

InitSpec InitSpec::zero_start(double scale_star_sq) {
  if (!(scale_star_sq >= 0.0)) throw std::invalid_argument("init: negative scale");
  InitSpec s;
  s.kind = InitKind::zero_start;
  s.scale_star_sq = scale_star_sq;
  return s;
}

InitSpec InitSpec::gaussian_both(double scale0_sq, double scale_star_sq) {
  if (!(scale0_sq >= 0.0) || !(scale_star_sq >= 0.0))
    throw std::invalid_argument("init: negative scale");
  InitSpec s;
  s.kind = InitKind::gaussian_both;
  s.scale0_sq = scale0_sq;
  s.scale_star_sq = scale_star_sq;
  return s;
}

InitSpec InitSpec::powerlaw_residual(double delta) {
  if (!(delta >= 0.0)) throw std::invalid_argument("init: delta must be >= 0");
  InitSpec s;
  s.kind = InitKind::powerlaw_residual;
  s.delta = delta;
  return s;
}

InitSpec InitSpec::ones_star() {
  InitSpec s;
  s.kind = InitKind::ones_star;
  return s;
}

InitSpec InitSpec::explicit_overlaps(double v11, double v12, double v22) {
  if (!(v11 >= 0.0) || !(v22 >= 0.0) || v11 * v22 - v12 * v12 < -1e-10)
    throw std::invalid_argument("init: explicit overlaps must form a PSD matrix");
  InitSpec s;
  s.kind = InitKind::explicit_overlaps;
  s.v11 = v11;
  s.v12 = v12;
  s.v22 = v22;
  return s;
}

std::vector<ModeState> init_modes(const Spectrum& spectrum, const InitSpec& init) {
  std::vector<ModeState> modes;
  modes.reserve(spectrum.num_groups());
  for (const auto& g : spectrum.groups()) {
    ModeState m;
    m.lambda = g.lambda;
    m.weight = g.weight;
    switch (init.kind) {
      case InitKind::zero_start:
        m.v22 = init.scale_star_sq;
        break;
      case InitKind::gaussian_both:
        m.v11 = init.scale0_sq;
        m.v22 = init.scale_star_sq;
        break;
      case InitKind::powerlaw_residual:
        if (!(g.lambda > 0.0))
          throw std::invalid_argument("init: powerlaw_residual needs positive eigenvalues");
        m.v22 = std::pow(g.lambda, -init.delta);
        break;
      case InitKind::ones_star:
        m.v22 = 1.0;
        break;
      case InitKind::explicit_overlaps:
        m.v11 = init.v11;
        m.v12 = init.v12;
        m.v22 = init.v22;
        break;
    }
    modes.push_back(m);
  }
  return modes;
}

ModeDerivative mode_derivative(const ModeState& mode, double gamma, double h1, double h2,
                               double fisher) {
  const double lg = mode.lambda * gamma;
  ModeDerivative d;
  d.dv11 = -4.0 * lg * (h1 * mode.v11 + h2 * mode.v12) + lg * gamma * fisher;
  d.dv12 = -2.0 * lg * (h1 * mode.v12 + h2 * mode.v22);
  return d;
}

Observables observables_of(const RiskModel& model, const Spectrum& spectrum,
                           const std::vector<ModeState>& modes) {
  Observables obs;
  double b11 = 0.0, b12 = 0.0, b22 = 0.0;
  double n11 = 0.0, n12 = 0.0, n22 = 0.0;
  double wl2d2 = 0.0;
  for (const auto& m : modes) {
    const double wl = m.weight * m.lambda;
    b11 += wl * m.v11;
    b12 += wl * m.v12;
    b22 += wl * m.v22;
    n11 += m.weight * m.v11;
    n12 += m.weight * m.v12;
    n22 += m.weight * m.v22;
    wl2d2 += wl * m.lambda * m.d2();
  }
  obs.B = {b11, b12, b22};
  obs.N = {n11, n12, n22};
  obs.d2 = n11 - 2.0 * n12 + n22;
  obs.wl2d2 = wl2d2;
  obs.risk = model.h(obs.B);
  obs.fisher = model.fisher_I(obs.B);
  obs.avg_eig = spectrum.avg_eig();
  obs.avg_eig2 = spectrum.avg_eig2();
  obs.omega2 = model.omega() * model.omega();
  return obs;
}

namespace {

// Flat integration state: v11/v12 per mode plus the rule accumulator.
struct FlowState {
  std::vector<double> v11, v12;
  RuleState rule;
};

struct FlowDeriv {
  std::vector<double> dv11, dv12;
  RuleState drule;
};

class DetFlow {
 public:
  DetFlow(const RiskModel& model, const Spectrum& spectrum, const StepsizeRule& rule,
          const std::vector<ModeState>& modes)
      : model_(model), spectrum_(spectrum), rule_(rule) {
    const std::size_t n = modes.size();
    lambda_.resize(n);
    weight_.resize(n);
    v22_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      lambda_[i] = modes[i].lambda;
      weight_[i] = modes[i].weight;
      v22_[i] = modes[i].v22;
      b22_ += weight_[i] * lambda_[i] * v22_[i];
      n22_ += weight_[i] * v22_[i];
    }
  }

  std::size_t num_modes() const { return lambda_.size(); }
  double v22(std::size_t i) const { return v22_[i]; }

  // Observables + learning rate for the given state. Freezes gamma once the
  // risk underflows (idealized rules near exact convergence).
  Observables eval(const FlowState& s) {
    Observables obs;
    double b11 = 0.0, b12 = 0.0, n11 = 0.0, n12 = 0.0, wl2d2 = 0.0;
    const std::size_t n = lambda_.size();
    for (std::size_t i = 0; i < n; ++i) {
      const double w = weight_[i], l = lambda_[i];
      const double wl = w * l;
      b11 += wl * s.v11[i];
      b12 += wl * s.v12[i];
      n11 += w * s.v11[i];
      n12 += w * s.v12[i];
      wl2d2 += wl * l * (s.v11[i] - 2.0 * s.v12[i] + v22_[i]);
    }
    obs.B = {b11, b12, b22_};
    obs.N = {n11, n12, n22_};
    obs.d2 = n11 - 2.0 * n12 + n22_;
    obs.wl2d2 = wl2d2;
    obs.risk = model_.h(obs.B);
    obs.fisher = model_.fisher_I(obs.B);
    obs.avg_eig = spectrum_.avg_eig();
    obs.avg_eig2 = spectrum_.avg_eig2();
    obs.omega2 = model_.omega() * model_.omega();
    auto g = gamma_det(rule_, s.rule, obs);
    if (g) {
      gamma_last_ = *g;
    } else {
      converged_ = true;
    }
    obs.gamma = gamma_last_;
    return obs;
  }

  void derivative(const FlowState& s, FlowDeriv& out) {
    const Observables obs = eval(s);
    const GradH gh = model_.grad_h(obs.B);
    const double gamma = obs.gamma;
    const double g2I = gamma * gamma * obs.fisher;
    const std::size_t n = lambda_.size();
    for (std::size_t i = 0; i < n; ++i) {
      const double lg = lambda_[i] * gamma;
      out.dv11[i] = -4.0 * lg * (gh.h1 * s.v11[i] + gh.h2 * s.v12[i]) + lambda_[i] * g2I;
      out.dv12[i] = -2.0 * lg * (gh.h1 * s.v12[i] + gh.h2 * v22_[i]);
    }
    out.drule = rule_state_derivative(rule_, s.rule, obs);
  }

  bool converged() const { return converged_; }

 private:
  const RiskModel& model_;
  const Spectrum& spectrum_;
  const StepsizeRule& rule_;
  std::vector<double> lambda_, weight_, v22_;
  double b22_ = 0.0;
  double n22_ = 0.0;
  double gamma_last_ = 0.0;
  bool converged_ = false;
};

void axpy_state(const FlowState& base, const FlowDeriv& d, double c, FlowState& out) {
  const std::size_t n = base.v11.size();
  for (std::size_t i = 0; i < n; ++i) {
    out.v11[i] = base.v11[i] + c * d.dv11[i];
    out.v12[i] = base.v12[i] + c * d.dv12[i];
  }
  out.rule.acc_I = base.rule.acc_I + c * d.drule.acc_I;
  out.rule.ema = base.rule.ema + c * d.drule.ema;
}

}  // namespace

Trajectory solve_detflow(const RiskModel& model, const Spectrum& spectrum,
                         const StepsizeRule& rule, const InitSpec& init, double t_end,
                         double dt, double record_every) {
  if (!(t_end > 0.0) || !(dt > 0.0))
    throw std::invalid_argument("detflow: t_end and dt must be > 0");
  if (!(record_every > 0.0)) record_every = dt;
  if (rule.is_idealized() && model.kind() != ModelKind::least_squares)
    throw std::invalid_argument("detflow: line search / Polyak rules are least-squares only");

  auto modes = init_modes(spectrum, init);
  DetFlow flow(model, spectrum, rule, modes);
  const std::size_t n = modes.size();

  FlowState s{std::vector<double>(n), std::vector<double>(n), initial_rule_state(rule)};
  for (std::size_t i = 0; i < n; ++i) {
    s.v11[i] = modes[i].v11;
    s.v12[i] = modes[i].v12;
  }

  FlowDeriv k1{std::vector<double>(n), std::vector<double>(n), {}};
  FlowDeriv k2 = k1, k3 = k1, k4 = k1;
  FlowState tmp = s;

  const auto total_steps = static_cast<long>(std::ceil(t_end / dt - 1e-9));
  const auto stride = std::max<long>(1, std::lround(record_every / dt));

  Trajectory traj;
  traj.metadata["solver"] = "ode";
  traj.metadata["model"] = model.name();
  traj.metadata["omega"] = fmt_meta(model.omega());
  traj.metadata["rule"] = rule.name();
  traj.metadata["d"] = std::to_string(spectrum.d());
  traj.metadata["dt"] = fmt_meta(dt);
  traj.metadata["t_end"] = fmt_meta(t_end);

  auto record = [&](double t) {
    const Observables obs = flow.eval(s);
    traj.points.push_back({t, obs.risk, obs.gamma, obs.d2, obs.B.b11, obs.B.b12, obs.B.b22});
    if (!std::isfinite(obs.risk) || !std::isfinite(obs.gamma))
      throw std::runtime_error("detflow: non-finite state at t=" + std::to_string(t));
  };

  record(0.0);
  double t = 0.0;
  for (long step = 0; step < total_steps; ++step) {
    const double h = std::min(dt, t_end - t);
    flow.derivative(s, k1);
    axpy_state(s, k1, 0.5 * h, tmp);
    flow.derivative(tmp, k2);
    axpy_state(s, k2, 0.5 * h, tmp);
    flow.derivative(tmp, k3);
    axpy_state(s, k3, h, tmp);
    flow.derivative(tmp, k4);
    for (std::size_t i = 0; i < n; ++i) {
      s.v11[i] += h / 6.0 * (k1.dv11[i] + 2.0 * k2.dv11[i] + 2.0 * k3.dv11[i] + k4.dv11[i]);
      s.v12[i] += h / 6.0 * (k1.dv12[i] + 2.0 * k2.dv12[i] + 2.0 * k3.dv12[i] + k4.dv12[i]);
    }
    s.rule.acc_I +=
        h / 6.0 * (k1.drule.acc_I + 2.0 * k2.drule.acc_I + 2.0 * k3.drule.acc_I + k4.drule.acc_I);
    s.rule.ema +=
        h / 6.0 * (k1.drule.ema + 2.0 * k2.drule.ema + 2.0 * k3.drule.ema + k4.drule.ema);
    t += h;

    // PSD repair within tolerance; anything worse is an integrator fault.
    for (std::size_t i = 0; i < n; ++i) {
      const double v22 = flow.v22(i);
      if (v22 > 0.0) {
        const double floor11 = s.v12[i] * s.v12[i] / v22;
        if (s.v11[i] < floor11) {
          if (floor11 - s.v11[i] > kPsdStepTol * std::max(1.0, floor11))
            throw std::runtime_error("detflow: mode matrix lost PSD beyond tolerance at t=" +
                                     std::to_string(t));
          s.v11[i] = floor11;
        }
      } else if (std::abs(s.v12[i]) > kPsdStepTol) {
        throw std::runtime_error("detflow: mode matrix lost PSD beyond tolerance at t=" +
                                 std::to_string(t));
      }
      const double d2 = s.v11[i] - 2.0 * s.v12[i] + v22;
      if (d2 < -kD2Tol)
        throw std::runtime_error("detflow: negative mode distance at t=" + std::to_string(t));
    }

    const bool last = (step + 1 == total_steps);
    if ((step + 1) % stride == 0 || last) record(last ? t_end : t);
  }
  if (flow.converged()) traj.metadata["converged"] = "true";
  return traj;
}

Trajectory scalar_identity_risk(double b, double eta, double t_end, double dt, double r0,
                                double record_every) {
  if (!(t_end > 0.0) || !(dt > 0.0))
    throw std::invalid_argument("scalar_identity_risk: t_end and dt must be > 0");
  if (!(b > 0.0) || !(eta > 0.0))
    throw std::invalid_argument("scalar_identity_risk: b, eta must be > 0");
  if (!(r0 >= 0.0)) throw std::invalid_argument("scalar_identity_risk: r0 must be >= 0");
  if (!(record_every > 0.0)) record_every = dt;

  const double b2 = b * b;
  auto d_risk = [&](double r, double acc) {
    const double den = b2 + 2.0 * acc;
    return eta * eta * r / den - 2.0 * eta * r / std::sqrt(den);
  };

  Trajectory traj;
  traj.metadata["solver"] = "scalar_identity";
  traj.metadata["dt"] = fmt_meta(dt);
  traj.metadata["t_end"] = fmt_meta(t_end);

  double r = r0, acc = 0.0, t = 0.0;
  const auto total_steps = static_cast<long>(std::ceil(t_end / dt - 1e-9));
  const auto stride = std::max<long>(1, std::lround(record_every / dt));
  auto record = [&](double tt) {
    const double gamma = eta / std::sqrt(b2 + 2.0 * acc);
    traj.points.push_back({tt, r, gamma, 2.0 * r, 0.0, 0.0, 0.0});
    if (!std::isfinite(r)) throw std::runtime_error("scalar_identity_risk: non-finite risk");
  };
  record(0.0);
  for (long step = 0; step < total_steps; ++step) {
    const double h = std::min(dt, t_end - t);
    const double kr1 = d_risk(r, acc), ka1 = r;
    const double kr2 = d_risk(r + 0.5 * h * kr1, acc + 0.5 * h * ka1), ka2 = r + 0.5 * h * kr1;
    const double kr3 = d_risk(r + 0.5 * h * kr2, acc + 0.5 * h * ka2), ka3 = r + 0.5 * h * kr2;
    const double kr4 = d_risk(r + h * kr3, acc + h * ka3), ka4 = r + h * kr3;
    r += h / 6.0 * (kr1 + 2.0 * kr2 + 2.0 * kr3 + kr4);
    acc += h / 6.0 * (ka1 + 2.0 * ka2 + 2.0 * ka3 + ka4);
    t += h;
    const bool last = (step + 1 == total_steps);
    if ((step + 1) % stride == 0 || last) record(last ? t_end : t);
  }
  return traj;
}

}  // namespace sgdflow
