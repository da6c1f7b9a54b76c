#include <cmath>
#include <random>
#include <stdexcept>

#include "doctest.h"
#include "sgdflow/detflow.hpp"

using namespace sgdflow;

TEST_CASE("init_modes closed forms") {
  auto spec = two_point_spectrum(1.0, 0.5, 4);

  auto zero = init_modes(spec, InitSpec::zero_start(1.0));
  for (const auto& m : zero) {
    CHECK(m.v11 == 0.0);
    CHECK(m.v12 == 0.0);
    CHECK(m.v22 == 1.0);
  }
  // Least-squares risk at this start: avg_eig/2 + omega^2/2.
  auto ls = RiskModel::least_squares(0.5);
  auto obs = observables_of(ls, spec, zero);
  CHECK(obs.risk == doctest::Approx(0.5 * spec.avg_eig() + 0.125).epsilon(1e-15));

  auto both = init_modes(spec, InitSpec::gaussian_both(1.0, 1.0));
  for (const auto& m : both) {
    CHECK(m.v11 == 1.0);
    CHECK(m.v12 == 0.0);
    CHECK(m.v22 == 1.0);
  }

  auto pl = init_modes(power_law_spectrum(0.3, 8), InitSpec::powerlaw_residual(0.0));
  for (const auto& m : pl) CHECK(m.v22 == 1.0);
  auto pl2 = init_modes(power_law_spectrum(0.3, 8), InitSpec::powerlaw_residual(0.7));
  for (const auto& m : pl2) CHECK(m.v22 == doctest::Approx(std::pow(m.lambda, -0.7)).epsilon(1e-14));

  CHECK_THROWS_AS(InitSpec::zero_start(-1.0), std::invalid_argument);
}

TEST_CASE("mode_derivative least-squares reduction") {
  ModeState m;
  m.lambda = 0.7;
  m.weight = 1.0;
  m.v11 = 0.4;
  m.v12 = 0.1;
  m.v22 = 1.0;
  const double gamma = 0.9, fisher = 1.3;
  // With (h1, h2) = (1/2, -1/2): dv11 = -2 l g (v11 - v12) + l g^2 I,
  // dv12 = -l g (v12 - v22).
  auto d = mode_derivative(m, gamma, 0.5, -0.5, fisher);
  CHECK(d.dv11 == doctest::Approx(-2.0 * 0.7 * 0.9 * (0.4 - 0.1) + 0.7 * 0.81 * 1.3).epsilon(1e-14));
  CHECK(d.dv12 == doctest::Approx(-0.7 * 0.9 * (0.1 - 1.0)).epsilon(1e-14));

  // Implied distance flow: d(D^2) = -2 g l D^2 + 2 g^2 l R with I = 2R.
  const double risk = 0.5 * fisher;
  CHECK(d.dv11 - 2.0 * d.dv12 ==
        doctest::Approx(-2.0 * gamma * m.lambda * m.d2() + 2.0 * gamma * gamma * m.lambda * risk)
            .epsilon(1e-14));

  auto d0 = mode_derivative(m, 0.0, 0.5, -0.5, fisher);
  CHECK(d0.dv11 == 0.0);
  CHECK(d0.dv12 == 0.0);
}

TEST_CASE("polyak on identity spectrum solves to R = exp(-t)/2") {
  auto model = RiskModel::least_squares(0.0);
  auto spec = identity_spectrum(100);
  auto traj = solve_detflow(model, spec, StepsizeRule::polyak_ls(), InitSpec::zero_start(1.0),
                            5.0, 1e-3, 0.1);
  for (const auto& p : traj.points) {
    CHECK(std::abs(p.risk - 0.5 * std::exp(-p.t)) < 1e-8);
    CHECK(p.gamma == doctest::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("constant learning rate above the stability threshold blows the risk up") {
  auto model = RiskModel::least_squares(0.0);
  auto spec = identity_spectrum(10);
  // Threshold is 2 / avg_eig = 2.
  auto up = solve_detflow(model, spec, StepsizeRule::constant(2.5), InitSpec::zero_start(1.0),
                          2.0, 1e-3, 0.25);
  for (std::size_t i = 1; i < up.points.size(); ++i)
    CHECK(up.points[i].risk > up.points[i - 1].risk);
  auto down = solve_detflow(model, spec, StepsizeRule::constant(1.5), InitSpec::zero_start(1.0),
                            2.0, 1e-3, 0.25);
  CHECK(down.points.back().risk < down.points.front().risk);
}

TEST_CASE("conservation with zero learning rate") {
  auto model = RiskModel::least_squares(0.3);
  auto spec = two_point_spectrum(1.2, 0.4, 8);
  auto traj = solve_detflow(model, spec, StepsizeRule::constant(0.0),
                            InitSpec::gaussian_both(0.5, 1.0), 1.0, 1e-3, 0.1);
  for (const auto& p : traj.points) {
    CHECK(p.risk == traj.points.front().risk);
    CHECK(p.d2 == traj.points.front().d2);
    CHECK(p.b12 == traj.points.front().b12);
  }
}

TEST_CASE("adagrad warm start overshoot then adaptation") {
  // eta/b far above the threshold: risk rises first, then adapts downward.
  auto model = RiskModel::least_squares(0.0);
  auto spec = identity_spectrum(10);
  auto traj = solve_detflow(model, spec, StepsizeRule::adagrad(1.0, 4.0),
                            InitSpec::zero_start(1.0), 8.0, 1e-3, 0.05);
  const double r0 = traj.points.front().risk;
  double rmax = 0.0;
  for (const auto& p : traj.points) rmax = std::max(rmax, p.risk);
  CHECK(rmax > 1.5 * r0);
  CHECK(traj.points.back().risk < r0);
  // AdaGrad rate never increases.
  for (std::size_t i = 1; i < traj.points.size(); ++i)
    CHECK(traj.points[i].gamma <= traj.points[i - 1].gamma + 1e-15);
}

TEST_CASE("least-squares risk never falls below the noise floor") {
  auto model = RiskModel::least_squares(0.8);
  auto spec = two_point_spectrum(1.5, 0.5, 16);
  for (auto rule : {StepsizeRule::adagrad(1.0, 1.0), StepsizeRule::polyak_ls()}) {
    auto traj =
        solve_detflow(model, spec, rule, InitSpec::zero_start(1.0), 20.0, 1e-3, 0.5);
    for (const auto& p : traj.points) CHECK(p.risk >= 0.5 * 0.8 * 0.8 - 1e-12);
  }
}

TEST_CASE("distance flow identity holds along the numerical trajectory") {
  // Five-point stencil derivative of D^2 against -2 g l D^2 + 2 g^2 l R.
  auto model = RiskModel::least_squares(0.0);
  auto spec = identity_spectrum(10);
  const double dt = 1e-3;
  auto traj = solve_detflow(model, spec, StepsizeRule::polyak_ls(), InitSpec::zero_start(1.0),
                            1.0, dt, dt);
  const auto& p = traj.points;
  REQUIRE(p.size() > 10);
  for (std::size_t i = 2; i + 2 < p.size(); i += 97) {
    const double fd =
        (-p[i + 2].d2 + 8.0 * p[i + 1].d2 - 8.0 * p[i - 1].d2 + p[i - 2].d2) / (12.0 * dt);
    const double rhs = -2.0 * p[i].gamma * p[i].d2 + 2.0 * p[i].gamma * p[i].gamma * p[i].risk;
    CHECK(std::abs(fd - rhs) < 10.0 * dt * dt * dt * dt);
  }
}

TEST_CASE("rk4 grid convergence is fourth order") {
  auto model = RiskModel::least_squares(0.0);
  auto spec = two_point_spectrum(1.0, 0.25, 8);
  auto rule = StepsizeRule::adagrad(1.0, 2.0);
  auto run = [&](double dt) {
    return solve_detflow(model, spec, rule, InitSpec::zero_start(1.0), 2.0, dt, 0.2);
  };
  auto sup = [](const Trajectory& a, const Trajectory& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.points.size(); ++i)
      m = std::max(m, std::abs(a.points[i].risk - b.points[i].risk));
    return m;
  };
  auto c1 = run(0.02), c2 = run(0.01), c3 = run(0.005);
  const double e12 = sup(c1, c2), e23 = sup(c2, c3);
  CHECK(e12 / e23 > 10.0);
  CHECK(e12 / e23 < 22.0);
}

TEST_CASE("scalar identity reduction agrees with the full flow") {
  auto model = RiskModel::least_squares(0.0);
  auto spec = identity_spectrum(50);
  auto full = solve_detflow(model, spec, StepsizeRule::adagrad(1.0, 1.0),
                            InitSpec::zero_start(1.0), 5.0, 1e-3, 0.1);
  auto scalar = scalar_identity_risk(1.0, 1.0, 5.0, 1e-3, 0.5, 0.1);
  REQUIRE(full.points.size() == scalar.points.size());
  for (std::size_t i = 0; i < full.points.size(); ++i)
    CHECK(std::abs(full.points[i].risk - scalar.points[i].risk) < 1e-6);
}

TEST_CASE("scalar identity edge behavior") {
  // eta/b above 2: the risk initially grows.
  auto hot = scalar_identity_risk(1.0, 3.0, 0.1, 1e-4, 0.5, 1e-2);
  CHECK(hot.points[1].risk > hot.points[0].risk);
  // Zero initial risk is a fixed point.
  auto frozen = scalar_identity_risk(1.0, 1.0, 1.0, 1e-3, 0.0, 0.1);
  for (const auto& p : frozen.points) CHECK(p.risk == 0.0);
}

TEST_CASE("line search never dips below its spectral floor") {
  auto model = RiskModel::least_squares(0.0);
  auto spec = two_point_spectrum(1.0, 0.25, 8);
  auto traj = solve_detflow(model, spec, StepsizeRule::line_search_ls(),
                            InitSpec::ones_star(), 50.0, 1e-3, 0.05);
  const double floor = spec.lambda_min() / spec.avg_eig2();
  for (const auto& p : traj.points) CHECK(p.gamma >= floor - 1e-12);
  // Line search decreases the risk monotonically.
  for (std::size_t i = 1; i < traj.points.size(); ++i)
    CHECK(traj.points[i].risk <= traj.points[i - 1].risk + 1e-15);
}

TEST_CASE("randomized configs keep the mode invariants") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int rep = 0; rep < 20; ++rep) {
    const int pick_spec = static_cast<int>(rng() % 3);
    Spectrum spec = pick_spec == 0   ? identity_spectrum(8)
                    : pick_spec == 1 ? two_point_spectrum(1.0 + unif(rng), 0.2 + 0.5 * unif(rng), 8)
                                     : power_law_spectrum(0.8 * unif(rng), 32);
    const double omega = (rng() % 2 == 0) ? 0.0 : unif(rng);
    auto model = RiskModel::least_squares(omega);
    const int pick_rule = static_cast<int>(rng() % 4);
    StepsizeRule rule = pick_rule == 0   ? StepsizeRule::constant(0.2 + unif(rng))
                        : pick_rule == 1 ? StepsizeRule::adagrad(1.0, 0.5 + 2.0 * unif(rng))
                        : pick_rule == 2 ? StepsizeRule::polyak_ls()
                                         : StepsizeRule::rmsprop(1.0, 0.5 + unif(rng), 0.5);
    auto init = (rng() % 2 == 0) ? InitSpec::zero_start(0.5 + unif(rng))
                                 : InitSpec::gaussian_both(unif(rng), 0.5 + unif(rng));
    auto traj = solve_detflow(model, spec, rule, init, 2.0, 1e-3, 0.1);
    for (const auto& p : traj.points) {
      CHECK(p.d2 >= -1e-10);
      CHECK(p.risk >= 0.5 * omega * omega - 1e-12);
      CHECK(std::isfinite(p.gamma));
    }
  }
}
