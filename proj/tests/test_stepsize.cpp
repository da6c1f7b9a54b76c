#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "sgdflow/stepsize.hpp"

using namespace sgdflow;

namespace {

Observables make_obs(double risk, double wl2d2, double avg_eig, double avg_eig2,
                     double omega2 = 0.0, double fisher = 0.0) {
  Observables o;
  o.risk = risk;
  o.wl2d2 = wl2d2;
  o.avg_eig = avg_eig;
  o.avg_eig2 = avg_eig2;
  o.omega2 = omega2;
  o.fisher = fisher;
  return o;
}

}  // namespace

TEST_CASE("adagrad deterministic rate") {
  auto rule = StepsizeRule::adagrad(1.0, 1.0);
  auto state = initial_rule_state(rule);
  auto obs = make_obs(1.0, 1.0, 1.0, 1.0);
  CHECK(gamma_det(rule, state, obs).value() == doctest::Approx(1.0).epsilon(1e-15));

  // gamma * sqrt(b^2 + avg_eig * acc) = eta identically.
  for (double acc : {0.0, 0.5, 3.0, 100.0}) {
    state.acc_I = acc;
    const double g = gamma_det(rule, state, obs).value();
    CHECK(g * std::sqrt(1.0 + acc) == doctest::Approx(1.0).epsilon(1e-14));
  }

  // Non-increasing in the accumulator.
  state.acc_I = 1.0;
  const double g1 = gamma_det(rule, state, obs).value();
  state.acc_I = 2.0;
  CHECK(gamma_det(rule, state, obs).value() < g1);
}

TEST_CASE("polyak deterministic rate") {
  auto rule = StepsizeRule::polyak_ls();
  RuleState state;
  for (double risk : {0.25, 1.0, 7.5}) {
    auto obs = make_obs(risk, 0.0, 1.0, 1.0);
    CHECK(gamma_det(rule, state, obs).value() == 1.0);  // exact
  }
  // With noise: (2R - w^2) / (2 avg_eig R).
  auto obs = make_obs(1.0, 0.0, 2.0, 1.0, 0.5);
  CHECK(gamma_det(rule, state, obs).value() == doctest::Approx(1.5 / 4.0).epsilon(1e-15));
  // Vanished risk signals convergence rather than dividing by zero.
  auto tiny = make_obs(0.0, 0.0, 1.0, 1.0);
  CHECK_FALSE(gamma_det(rule, state, tiny).has_value());
}

TEST_CASE("line search deterministic rate") {
  auto rule = StepsizeRule::line_search_ls();
  RuleState state;
  // Identity spectrum: numerator sum w l^2 D^2 = D2 = 2R, so gamma = 1.
  auto obs = make_obs(0.5, 1.0, 1.0, 1.0);
  CHECK(gamma_det(rule, state, obs).value() == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("stability thresholds are twice the greedy rates") {
  auto obs = make_obs(0.8, 1.7, 1.3, 2.1, 0.09);
  RuleState state;
  const double g_line = gamma_det(StepsizeRule::line_search_ls(), state, obs).value();
  const double g_polyak = gamma_det(StepsizeRule::polyak_ls(), state, obs).value();
  CHECK(risk_stability_threshold(obs) == doctest::Approx(2.0 * g_line).epsilon(1e-15));
  CHECK(distance_stability_threshold(obs) == doctest::Approx(2.0 * g_polyak).epsilon(1e-15));
}

TEST_CASE("rule state derivatives") {
  auto obs = make_obs(0.7, 0.0, 1.5, 1.0, 0.0, 1.4);  // fisher = 2 * risk on LS
  auto adagrad = StepsizeRule::adagrad(1.0, 1.0);
  auto ds = rule_state_derivative(adagrad, initial_rule_state(adagrad), obs);
  CHECK(ds.acc_I == doctest::Approx(1.4).epsilon(1e-15));
  CHECK(ds.ema == 0.0);

  auto rmsprop = StepsizeRule::rmsprop(2.0, 1.0, 0.5);
  auto s0 = initial_rule_state(rmsprop);
  CHECK(s0.ema == 4.0);
  auto dr = rule_state_derivative(rmsprop, s0, obs);
  CHECK(dr.ema == doctest::Approx(-0.5 * 4.0 + 1.5 * 1.4).epsilon(1e-14));

  auto constant = StepsizeRule::constant(0.3);
  auto dc = rule_state_derivative(constant, initial_rule_state(constant), obs);
  CHECK(dc.acc_I == 0.0);
  CHECK(dc.ema == 0.0);
}

TEST_CASE("rmsprop homogeneous decay") {
  // With fisher identically zero the ema solves ema' = -alpha ema.
  auto rule = StepsizeRule::rmsprop(1.5, 1.0, 0.8);
  auto obs = make_obs(0.0, 0.0, 1.0, 1.0, 0.0, 0.0);
  RuleState s = initial_rule_state(rule);
  const double dt = 1e-4;
  for (int k = 0; k < 10000; ++k) {
    // RK4 on the scalar ema equation.
    auto f = [&](double e) {
      RuleState tmp = s;
      tmp.ema = e;
      return rule_state_derivative(rule, tmp, obs).ema;
    };
    const double k1 = f(s.ema);
    const double k2 = f(s.ema + 0.5 * dt * k1);
    const double k3 = f(s.ema + 0.5 * dt * k2);
    const double k4 = f(s.ema + dt * k3);
    s.ema += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  CHECK(s.ema == doctest::Approx(1.5 * 1.5 * std::exp(-0.8)).epsilon(1e-10));
}

TEST_CASE("discrete adagrad") {
  auto rule = StepsizeRule::adagrad(1.0, 1.0);
  const int d = 100;
  auto state = initial_discrete_state(rule, d);
  CHECK(state.bk2 == doctest::Approx(1.0e4).epsilon(1e-15));
  Observables obs;
  // Zero gradient: g reduces to d * eta / (b d) = eta / b.
  const double g0 = gamma_discrete(rule, state, d, 0.0, obs);
  CHECK(g0 == doctest::Approx(1.0).epsilon(1e-15));
  // Non-increasing in k.
  double prev = g0;
  for (int k = 0; k < 50; ++k) {
    const double g = gamma_discrete(rule, state, d, 37.5, obs);
    CHECK(g <= prev);
    prev = g;
  }
}

TEST_CASE("discrete rmsprop matches its recursion") {
  auto rule = StepsizeRule::rmsprop(2.0, 1.5, 0.9);
  const int d = 10;
  auto state = initial_discrete_state(rule, d);
  double expect = (2.0 * d) * (2.0 * d);
  Observables obs;
  for (int k = 0; k < 5; ++k) {
    const double gn2 = 3.0 + k;
    const double g = gamma_discrete(rule, state, d, gn2, obs);
    expect = 0.9 * expect + 0.1 * gn2;
    CHECK(state.bk2 == doctest::Approx(expect).epsilon(1e-14));
    CHECK(g == doctest::Approx(d * 1.5 / std::sqrt(expect)).epsilon(1e-14));
  }
}

TEST_CASE("discrete polyak on noiseless least squares is exactly one") {
  auto rule = StepsizeRule::polyak_ls();
  auto state = initial_discrete_state(rule, 50);
  for (double risk : {1e-12, 0.3, 42.0}) {
    auto obs = make_obs(risk, 0.0, 1.0, 1.0);
    CHECK(gamma_discrete(rule, state, 50, 0.0, obs) == 1.0);
  }
}

TEST_CASE("rule names and validation") {
  CHECK(StepsizeRule::constant(0.1).name() == "constant");
  CHECK(StepsizeRule::adagrad(1, 1).name() == "adagrad");
  CHECK(StepsizeRule::rmsprop(1, 1, 1).name() == "rmsprop");
  CHECK(StepsizeRule::line_search_ls().name() == "linesearch");
  CHECK(StepsizeRule::polyak_ls().name() == "polyak");
  CHECK_THROWS_AS(StepsizeRule::constant(-0.1), std::invalid_argument);
  CHECK_THROWS_AS(StepsizeRule::adagrad(0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(StepsizeRule::rmsprop(1.0, 1.0, 0.0), std::invalid_argument);
}
