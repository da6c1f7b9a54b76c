#include "sgdflow/sgdsim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <future>
#include <stdexcept>
#include <thread>

namespace sgdflow {

namespace {

std::string fmt_meta(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::mt19937_64 seeded_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

// Population observables of the current iterate, for the idealized rules
// and for records.
Observables sgd_observables(const SgdState& s, const RiskModel& model,
                            const Spectrum& spectrum) {
  Observables obs;
  const int d = s.d();
  double b11 = 0.0, b12 = 0.0, b22 = 0.0, n11 = 0.0, n12 = 0.0, n22 = 0.0;
  double wl2d2 = 0.0;
  for (int i = 0; i < d; ++i) {
    const double xi = s.x[static_cast<std::size_t>(i)];
    const double si = s.xstar[static_cast<std::size_t>(i)];
    const double l = s.lambda[static_cast<std::size_t>(i)];
    b11 += l * xi * xi;
    b12 += l * xi * si;
    b22 += l * si * si;
    n11 += xi * xi;
    n12 += xi * si;
    n22 += si * si;
    const double diff = xi - si;
    wl2d2 += l * l * diff * diff;
  }
  obs.B = {b11, b12, b22};
  obs.N = {d * n11, d * n12, d * n22};
  obs.d2 = n11 - 2.0 * n12 + n22;  // ||x - xstar||^2
  obs.wl2d2 = wl2d2;
  obs.risk = model.h(obs.B);
  obs.fisher = model.fisher_I(obs.B);
  obs.avg_eig = spectrum.avg_eig();
  obs.avg_eig2 = spectrum.avg_eig2();
  obs.omega2 = model.omega() * model.omega();
  return obs;
}

}  // namespace

std::pair<std::vector<double>, std::vector<double>> init_vectors(const InitSpec& init,
                                                                 const Spectrum& spectrum,
                                                                 std::uint64_t seed) {
  const int d = spectrum.d();
  std::vector<double> x0(static_cast<std::size_t>(d), 0.0);
  std::vector<double> xstar(static_cast<std::size_t>(d), 0.0);
  auto lambdas = spectrum.expand();
  auto rng = seeded_rng(seed, 0x1717);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));

  switch (init.kind) {
    case InitKind::zero_start: {
      const double s = std::sqrt(init.scale_star_sq) * inv_sqrt_d;
      for (auto& v : xstar) v = s * normal(rng);
      break;
    }
    case InitKind::gaussian_both: {
      const double s0 = std::sqrt(init.scale0_sq) * inv_sqrt_d;
      const double ss = std::sqrt(init.scale_star_sq) * inv_sqrt_d;
      for (auto& v : x0) v = s0 * normal(rng);
      for (auto& v : xstar) v = ss * normal(rng);
      break;
    }
    case InitKind::powerlaw_residual: {
      for (int i = 0; i < d; ++i) {
        const double l = lambdas[static_cast<std::size_t>(i)];
        if (!(l > 0.0))
          throw std::invalid_argument("sgdsim: powerlaw_residual needs positive eigenvalues");
        xstar[static_cast<std::size_t>(i)] = std::pow(l, -0.5 * init.delta) * inv_sqrt_d;
      }
      break;
    }
    case InitKind::ones_star: {
      for (auto& v : xstar) v = inv_sqrt_d;
      break;
    }
    case InitKind::explicit_overlaps:
      throw std::invalid_argument("sgdsim: explicit overlaps have no vector realization");
  }
  return {std::move(x0), std::move(xstar)};
}

SgdState make_sgd_state(const Spectrum& spectrum, const StepsizeRule& rule,
                        const InitSpec& init, std::uint64_t seed) {
  SgdState s;
  auto [x0, xstar] = init_vectors(init, spectrum, seed);
  s.x = std::move(x0);
  s.xstar = std::move(xstar);
  s.lambda = spectrum.expand();
  s.sqrt_lambda.resize(s.lambda.size());
  for (std::size_t i = 0; i < s.lambda.size(); ++i) s.sqrt_lambda[i] = std::sqrt(s.lambda[i]);
  s.rule_state = initial_discrete_state(rule, spectrum.d());
  s.rng = seeded_rng(seed, 0x5eed);
  return s;
}

double sgd_risk(const SgdState& s, const RiskModel& model) {
  if (model.kind() == ModelKind::least_squares) {
    double acc = 0.0;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      const double diff = s.x[i] - s.xstar[i];
      acc += s.lambda[i] * diff * diff;
    }
    return 0.5 * acc + 0.5 * model.omega() * model.omega();
  }
  double b11 = 0.0, b12 = 0.0, b22 = 0.0;
  for (std::size_t i = 0; i < s.x.size(); ++i) {
    b11 += s.lambda[i] * s.x[i] * s.x[i];
    b12 += s.lambda[i] * s.x[i] * s.xstar[i];
    b22 += s.lambda[i] * s.xstar[i] * s.xstar[i];
  }
  return model.h({b11, b12, b22});
}

double sample_step(SgdState& s, const RiskModel& model, const StepsizeRule& rule,
                   const Spectrum& spectrum) {
  const int d = s.d();
  std::normal_distribution<double> normal(0.0, 1.0);

  thread_local std::vector<double> a;
  a.resize(static_cast<std::size_t>(d));
  double r = 0.0, rstar = 0.0, a_norm2 = 0.0;
  for (int i = 0; i < d; ++i) {
    const double z = normal(s.rng);
    const double ai = s.sqrt_lambda[static_cast<std::size_t>(i)] * z;
    a[static_cast<std::size_t>(i)] = ai;
    r += ai * s.x[static_cast<std::size_t>(i)];
    rstar += ai * s.xstar[static_cast<std::size_t>(i)];
    a_norm2 += ai * ai;
  }
  double eps = 0.0;
  if (model.kind() == ModelKind::least_squares && model.omega() > 0.0)
    eps = model.omega() * normal(s.rng);

  const double fp = model.f_prime(r, rstar, eps);
  const double grad_sq_norm = fp * fp * a_norm2;

  Observables obs;
  if (rule.is_idealized()) obs = sgd_observables(s, model, spectrum);
  const double g = gamma_discrete(rule, s.rule_state, d, grad_sq_norm, obs);

  const double scale = g / d * fp;
  for (int i = 0; i < d; ++i) s.x[static_cast<std::size_t>(i)] -= scale * a[static_cast<std::size_t>(i)];
  ++s.k;
  return g;
}

Trajectory run_sgd(const RiskModel& model, const Spectrum& spectrum, const StepsizeRule& rule,
                   const InitSpec& init, double t_end, std::uint64_t seed,
                   double record_every) {
  if (!(t_end > 0.0)) throw std::invalid_argument("sgdsim: t_end must be > 0");
  if (rule.is_idealized() && model.kind() != ModelKind::least_squares)
    throw std::invalid_argument("sgdsim: line search / Polyak rules are least-squares only");
  const int d = spectrum.d();
  if (!(record_every > 0.0)) record_every = 1.0 / d;

  SgdState s = make_sgd_state(spectrum, rule, init, seed);
  const auto steps = static_cast<std::int64_t>(std::ceil(t_end * d - 1e-9));
  const auto stride = std::max<std::int64_t>(1, std::llround(record_every * d));

  Trajectory traj;
  traj.metadata["solver"] = "sgd";
  traj.metadata["model"] = model.name();
  traj.metadata["omega"] = fmt_meta(model.omega());
  traj.metadata["rule"] = rule.name();
  traj.metadata["d"] = std::to_string(d);
  traj.metadata["seed"] = std::to_string(seed);
  traj.metadata["t_end"] = fmt_meta(t_end);

  double gamma_applied = gamma_discrete_initial(rule, sgd_observables(s, model, spectrum));
  auto record = [&]() {
    const Observables obs = sgd_observables(s, model, spectrum);
    const double t = static_cast<double>(s.k) / d;
    traj.points.push_back(
        {t, obs.risk, gamma_applied, obs.d2, obs.B.b11, obs.B.b12, obs.B.b22});
    if (!std::isfinite(obs.risk))
      throw std::runtime_error("sgdsim: risk diverged at t=" + std::to_string(t) +
                               " (learning rate above the stability threshold?)");
  };

  record();
  for (std::int64_t k = 1; k <= steps; ++k) {
    gamma_applied = sample_step(s, model, rule, spectrum);
    if (k % stride == 0 || k == steps) record();
  }
  return traj;
}

EnsembleSummary run_ensemble(const RiskModel& model, const Spectrum& spectrum,
                             const StepsizeRule& rule, const InitSpec& init, double t_end,
                             std::uint64_t seed, double record_every, int n_runs) {
  if (n_runs < 1) throw std::invalid_argument("sgdsim: need at least one run");

  std::vector<Trajectory> runs(static_cast<std::size_t>(n_runs));
  const unsigned workers = std::max(1u, std::thread::hardware_concurrency());
  std::vector<std::future<void>> futures;
  std::atomic<int> next{0};
  for (unsigned w = 0; w < workers; ++w) {
    futures.push_back(std::async(std::launch::async, [&] {
      for (int i = next.fetch_add(1); i < n_runs; i = next.fetch_add(1)) {
        // Stream-split: run i derives its generator from (seed, i).
        runs[static_cast<std::size_t>(i)] =
            run_sgd(model, spectrum, rule, init, t_end, seed + 0x9e3779b97f4a7c15ULL * i,
                    record_every);
      }
    }));
  }
  for (auto& f : futures) f.get();

  const std::size_t n_points = runs.front().points.size();
  for (const auto& r : runs)
    if (r.points.size() != n_points)
      throw std::runtime_error("sgdsim: ensemble runs disagree on the record grid");

  auto quantile = [](std::vector<double>& v, double q) {
    std::sort(v.begin(), v.end());
    const double pos = q * (static_cast<double>(v.size()) - 1.0);
    const auto lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return (1.0 - frac) * v[lo] + frac * v[hi];
  };

  EnsembleSummary summary;
  summary.median.metadata = runs.front().metadata;
  summary.median.metadata["n_runs"] = std::to_string(n_runs);
  summary.median.metadata["seed"] = std::to_string(seed);
  summary.median.points.resize(n_points);
  summary.risk_q05.resize(n_points);
  summary.risk_q95.resize(n_points);
  summary.gamma_q05.resize(n_points);
  summary.gamma_q95.resize(n_points);

  std::vector<double> buf(static_cast<std::size_t>(n_runs));
  for (std::size_t p = 0; p < n_points; ++p) {
    auto collect = [&](auto getter) {
      for (int i = 0; i < n_runs; ++i)
        buf[static_cast<std::size_t>(i)] = getter(runs[static_cast<std::size_t>(i)].points[p]);
    };
    TrajectoryPoint& out = summary.median.points[p];
    out.t = runs.front().points[p].t;
    collect([](const TrajectoryPoint& q) { return q.risk; });
    summary.risk_q05[p] = quantile(buf, 0.05);
    summary.risk_q95[p] = quantile(buf, 0.95);
    out.risk = quantile(buf, 0.5);
    collect([](const TrajectoryPoint& q) { return q.gamma; });
    summary.gamma_q05[p] = quantile(buf, 0.05);
    summary.gamma_q95[p] = quantile(buf, 0.95);
    out.gamma = quantile(buf, 0.5);
    collect([](const TrajectoryPoint& q) { return q.d2; });
    out.d2 = quantile(buf, 0.5);
    collect([](const TrajectoryPoint& q) { return q.b11; });
    out.b11 = quantile(buf, 0.5);
    collect([](const TrajectoryPoint& q) { return q.b12; });
    out.b12 = quantile(buf, 0.5);
    collect([](const TrajectoryPoint& q) { return q.b22; });
    out.b22 = quantile(buf, 0.5);
  }
  return summary;
}

}  // namespace sgdflow
