#include "sgdflow/volterra.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace sgdflow {

namespace {

std::string fmt_meta(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// (exp(-c x) - exp(-a x)) / (a - c), stable as a -> c.
double exp_diff_quotient(double a, double c, double x) {
  const double u = (a - c) * x;
  if (std::abs(u) < 1e-8) return x * std::exp(-c * x) * (1.0 - 0.5 * u);
  return (std::exp(-c * x) - std::exp(-a * x)) / (a - c);
}

}  // namespace

KernelPair::KernelPair(const Spectrum& spectrum, std::vector<double> d2_init, double omega)
    : d2_init_(std::move(d2_init)), omega_(omega) {
  if (d2_init_.size() != spectrum.num_groups())
    throw std::invalid_argument("volterra: one initial residual per spectrum group required");
  if (!(omega_ >= 0.0)) throw std::invalid_argument("volterra: omega must be >= 0");
  lambda_.reserve(spectrum.num_groups());
  weight_.reserve(spectrum.num_groups());
  for (const auto& g : spectrum.groups()) {
    lambda_.push_back(g.lambda);
    weight_.push_back(g.weight);
  }
  for (double v : d2_init_)
    if (!(v >= 0.0)) throw std::invalid_argument("volterra: negative initial residual");
  avg_eig_ = spectrum.avg_eig();
  avg_eig2_ = spectrum.avg_eig2();
}

KernelPair::KernelPair(const Spectrum& spectrum, const InitSpec& init, double omega)
    : KernelPair(spectrum,
                 [&] {
                   auto modes = init_modes(spectrum, init);
                   std::vector<double> d2;
                   d2.reserve(modes.size());
                   for (const auto& m : modes) d2.push_back(m.d2());
                   return d2;
                 }(),
                 omega) {}

double KernelPair::forcing(double x) const {
  double acc = 0.0;
  for (std::size_t i = 0; i < lambda_.size(); ++i)
    acc += weight_[i] * lambda_[i] * d2_init_[i] * std::exp(-2.0 * lambda_[i] * x);
  return 0.5 * acc;
}

double KernelPair::kernel(double x) const {
  double acc = 0.0;
  for (std::size_t i = 0; i < lambda_.size(); ++i)
    acc += weight_[i] * lambda_[i] * lambda_[i] * std::exp(-2.0 * lambda_[i] * x);
  return acc;
}

double KernelPair::kernel_self_convolution(double x) const {
  double acc = 0.0;
  for (std::size_t g = 0; g < lambda_.size(); ++g) {
    const double cg = weight_[g] * lambda_[g] * lambda_[g];
    for (std::size_t h = 0; h < lambda_.size(); ++h) {
      const double ch = weight_[h] * lambda_[h] * lambda_[h];
      acc += cg * ch * exp_diff_quotient(2.0 * lambda_[g], 2.0 * lambda_[h], x);
    }
  }
  return acc;
}

Trajectory solve_volterra(const KernelPair& kp, const StepsizeRule& rule, double t_end,
                          double dt, double record_every) {
  if (!(t_end > 0.0) || !(dt > 0.0))
    throw std::invalid_argument("volterra: t_end and dt must be > 0");
  if (rule.kind != RuleKind::constant && rule.kind != RuleKind::adagrad_norm)
    throw std::invalid_argument(
        "volterra: only constant and adagrad rules close over the risk history");
  if (!(record_every > 0.0)) record_every = dt;

  const double noise_floor = 0.5 * kp.omega() * kp.omega();
  const auto& lambda = kp.lambdas();
  const auto& weight = kp.weights();
  const std::size_t ng = lambda.size();

  auto gamma_of = [&](double int_risk) {
    if (rule.kind == RuleKind::constant) return rule.gamma0;
    return rule.eta / std::sqrt(rule.b * rule.b + 2.0 * kp.avg_eig() * int_risk);
  };

  const auto n_steps = static_cast<long>(std::ceil(t_end / dt - 1e-9));
  const auto stride = std::max<long>(1, std::lround(record_every / dt));

  // Trapezoid history (node weights dt/2 at s=0, dt for committed interior
  // nodes) folded into per-group accumulators: acc[g] tracks
  // sum_s w_s gamma_s^2 R_s exp(-2 lambda_g (Gamma_now - Gamma_s)), which
  // reproduces the direct full-history sum exactly because the kernel is a
  // finite exponential mixture.
  std::vector<double> acc(ng, 0.0);

  double int_risk = 0.0;
  double big_gamma = 0.0;
  double r = kp.forcing(0.0) + noise_floor;
  double gamma = gamma_of(0.0);
  for (std::size_t g = 0; g < ng; ++g) acc[g] = 0.5 * dt * gamma * gamma * r;

  Trajectory traj;
  traj.metadata["solver"] = "volterra";
  traj.metadata["rule"] = rule.name();
  traj.metadata["omega"] = fmt_meta(kp.omega());
  traj.metadata["dt"] = fmt_meta(dt);
  traj.metadata["t_end"] = fmt_meta(t_end);
  traj.points.push_back({0.0, r, gamma, 0.0, 0.0, 0.0, 0.0});

  const double k0 = kp.kernel(0.0);
  double t = 0.0;
  for (long step = 1; step <= n_steps; ++step) {
    const double h = std::min(dt, t_end - t);
    const double r_prev = r, gamma_prev = gamma;

    double r_next = r_prev;  // predictor
    double gamma_next = gamma_prev;
    double d_gamma = 0.0;
    double residual_prev = -1.0;
    for (int pass = 0; pass < 2; ++pass) {
      const double int_risk_next = int_risk + 0.5 * h * (r_prev + r_next);
      gamma_next = gamma_of(int_risk_next);
      d_gamma = 0.5 * h * (gamma_prev + gamma_next);
      double memory = 0.0;
      for (std::size_t g = 0; g < ng; ++g)
        memory +=
            weight[g] * lambda[g] * lambda[g] * acc[g] * std::exp(-2.0 * lambda[g] * d_gamma);
      memory += 0.5 * h * gamma_next * gamma_next * k0 * r_next;
      const double r_new = kp.forcing(big_gamma + d_gamma) + noise_floor + memory;
      const double residual = std::abs(r_new - r_next);
      if (pass == 1 && residual > residual_prev && residual > 1e-10 * (1.0 + std::abs(r_new)))
        throw std::runtime_error("volterra: corrector residual grew; decrease dt");
      residual_prev = residual;
      r_next = r_new;
    }

    // Commit the step.
    int_risk += 0.5 * h * (r_prev + r_next);
    big_gamma += d_gamma;
    r = r_next;
    gamma = gamma_next;
    for (std::size_t g = 0; g < ng; ++g) {
      acc[g] = acc[g] * std::exp(-2.0 * lambda[g] * d_gamma) + h * gamma * gamma * r;
    }
    t += h;

    if (!std::isfinite(r))
      throw std::runtime_error("volterra: non-finite risk at t=" + std::to_string(t));
    const bool last = (step == n_steps);
    if (step % stride == 0 || last)
      traj.points.push_back({last ? t_end : t, r, gamma, 0.0, 0.0, 0.0, 0.0});
  }
  return traj;
}

EnvelopeResult lower_upper_envelopes(const KernelPair& kp, double gamma0,
                                     const std::vector<double>& t_grid) {
  EnvelopeResult res;
  if (kp.omega() != 0.0) {
    res.reason = "envelopes defined for the noiseless equation only";
    return res;
  }
  if (t_grid.size() < 2) {
    res.reason = "need at least two grid points";
    return res;
  }
  const double k1 = kp.kernel_l1_norm();
  const double headroom = 1.0 / (2.0 * k1 * gamma0) - 1.0;
  if (!(headroom > 0.0)) {
    res.reason = "contraction condition 2 ||K||_1 gamma0 < 1 violated";
    return res;
  }
  const double eps = std::min(1.0, 0.5 * headroom);
  const double q = 2.0 * k1 * (1.0 + eps) * gamma0;

  // Find the horizon beyond which the kernel self-convolution is dominated.
  const double x_max = gamma0 * t_grid.back();
  const int nx = 512;
  int i_T = -1;
  std::vector<double> xs(nx + 1), conv_ok(nx + 1);
  for (int i = 0; i <= nx; ++i) {
    const double x = x_max * i / nx;
    xs[static_cast<std::size_t>(i)] = x;
    conv_ok[static_cast<std::size_t>(i)] =
        (kp.kernel_self_convolution(x) <= 2.0 * (1.0 + eps) * k1 * kp.kernel(x)) ? 1.0 : 0.0;
  }
  for (int i = 0; i <= nx; ++i) {
    bool all_ok = true;
    for (int j = i; j <= nx; ++j)
      if (conv_ok[static_cast<std::size_t>(j)] == 0.0) {
        all_ok = false;
        break;
      }
    if (all_ok) {
      i_T = i;
      break;
    }
  }
  if (i_T < 0) {
    res.reason = "kernel self-convolution condition fails on the grid";
    return res;
  }
  const double horizon = xs[static_cast<std::size_t>(i_T)];
  const double C =
      (kp.kernel(0.0) / (kp.kernel(horizon) * (2.0 * eps + 1.0)) + 2.0) / (1.0 - q);

  // int_0^t K(gamma0 (t-s)) F(gamma0 s) ds in closed form per group pair.
  const auto& lambda = kp.lambdas();
  const auto& weight = kp.weights();
  const auto& d20 = kp.d2_init();
  auto memory_integral = [&](double t) {
    double acc = 0.0;
    for (std::size_t g = 0; g < lambda.size(); ++g) {
      const double cg = weight[g] * lambda[g] * lambda[g];
      for (std::size_t h = 0; h < lambda.size(); ++h) {
        const double ch = 0.5 * weight[h] * lambda[h] * d20[h];
        acc += cg * ch *
               exp_diff_quotient(2.0 * lambda[g] * gamma0, 2.0 * lambda[h] * gamma0, t);
      }
    }
    return acc;
  };

  res.available = true;
  res.epsilon = eps;
  res.horizon_T = horizon;
  res.constant_C = C;
  res.t = t_grid;
  res.lower.reserve(t_grid.size());
  res.upper.reserve(t_grid.size());
  for (double t : t_grid) {
    const double f = kp.forcing(gamma0 * t);
    const double mem = gamma0 * gamma0 * memory_integral(t);
    res.lower.push_back(f + mem);
    res.upper.push_back(f + C * mem);
  }
  return res;
}

}  // namespace sgdflow
