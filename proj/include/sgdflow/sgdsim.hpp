#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "sgdflow/detflow.hpp"
#include "sgdflow/spectrum.hpp"
#include "sgdflow/stepsize.hpp"
#include "sgdflow/trajectory.hpp"

namespace sgdflow {

// One-pass SGD in the eigenbasis of the covariance: samples are drawn as
// a_i = sqrt(lambda_i) z_i with z iid standard normal, so every per-step
// quantity is O(d). Fully deterministic given the seed.
struct SgdState {
  std::vector<double> x;
  std::vector<double> xstar;
  std::vector<double> lambda;       // expanded to length d
  std::vector<double> sqrt_lambda;
  DiscreteRuleState rule_state;
  std::int64_t k = 0;
  std::mt19937_64 rng;

  int d() const { return static_cast<int>(x.size()); }
};

// Draws the initial iterate/signal pair in eigenbasis coordinates.
// powerlaw_residual uses deterministic coordinates with
// d * (xstar_i - x0_i)^2 = lambda_i^(-delta).
std::pair<std::vector<double>, std::vector<double>> init_vectors(const InitSpec& init,
                                                                 const Spectrum& spectrum,
                                                                 std::uint64_t seed);

SgdState make_sgd_state(const Spectrum& spectrum, const StepsizeRule& rule,
                        const InitSpec& init, std::uint64_t seed);

// Population risk of the current iterate (exact, evaluated in the
// eigenbasis; no dataset involved).
double sgd_risk(const SgdState& state, const RiskModel& model);

// One SGD update with a freshly drawn sample; returns the applied rate g_k.
double sample_step(SgdState& state, const RiskModel& model, const StepsizeRule& rule,
                   const Spectrum& spectrum);

// Runs ceil(t_end * d) steps, recording at t = k/d every record_every time
// units (plus the final step).
Trajectory run_sgd(const RiskModel& model, const Spectrum& spectrum, const StepsizeRule& rule,
                   const InitSpec& init, double t_end, std::uint64_t seed,
                   double record_every);

// Independent seeded runs aggregated per time point (median and 5%/95%
// quantiles). Runs may execute concurrently; the result only depends on the
// base seed and run count.
EnsembleSummary run_ensemble(const RiskModel& model, const Spectrum& spectrum,
                             const StepsizeRule& rule, const InitSpec& init, double t_end,
                             std::uint64_t seed, double record_every, int n_runs);

}  // namespace sgdflow
