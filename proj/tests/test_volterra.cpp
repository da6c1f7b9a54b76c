#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "sgdflow/experiment.hpp"
#include "sgdflow/volterra.hpp"

using namespace sgdflow;

TEST_CASE("kernel values") {
  auto id = identity_spectrum(64);
  KernelPair kp(id, InitSpec::zero_start(1.0), 0.0);
  CHECK(kp.forcing(0.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(kp.kernel(0.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(kp.kernel_l1_norm() == doctest::Approx(0.5).epsilon(1e-15));

  // Two-point (1, 1/2), unit residuals:
  // F(x) = e^-2x / 4 + e^-x / 8, K(x) = e^-2x / 2 + e^-x / 8.
  auto tp = two_point_spectrum(1.0, 0.5, 8);
  KernelPair kp2(tp, InitSpec::zero_start(1.0), 0.0);
  for (double x : {0.0, 0.3, 1.0, 4.0}) {
    CHECK(kp2.forcing(x) ==
          doctest::Approx(0.25 * std::exp(-2.0 * x) + 0.125 * std::exp(-x)).epsilon(1e-14));
    CHECK(kp2.kernel(x) ==
          doctest::Approx(0.5 * std::exp(-2.0 * x) + 0.125 * std::exp(-x)).epsilon(1e-14));
  }
  // Strictly decreasing to zero.
  double prev_f = kp2.forcing(0.0), prev_k = kp2.kernel(0.0);
  for (double x : {0.5, 1.0, 2.0, 5.0, 20.0}) {
    CHECK(kp2.forcing(x) < prev_f);
    CHECK(kp2.kernel(x) < prev_k);
    prev_f = kp2.forcing(x);
    prev_k = kp2.kernel(x);
  }
  CHECK(kp2.forcing(40.0) < 1e-15);

  // ||K||_1 equals avg_eig / 2 for any spectrum (per-mode exponential
  // integral); cross-check by quadrature.
  double quad = 0.0;
  const double dx = 1e-3;
  for (int i = 0; i < 40000; ++i)
    quad += dx * 0.5 * (kp2.kernel(i * dx) + kp2.kernel((i + 1) * dx));
  CHECK(quad == doctest::Approx(kp2.kernel_l1_norm()).epsilon(1e-6));
}

TEST_CASE("zero learning rate keeps the risk at its forcing value") {
  auto tp = two_point_spectrum(1.2, 0.6, 8);
  KernelPair kp(tp, InitSpec::zero_start(1.0), 0.4);
  auto traj = solve_volterra(kp, StepsizeRule::constant(0.0), 2.0, 1e-3, 0.2);
  for (const auto& p : traj.points)
    CHECK(p.risk == doctest::Approx(kp.forcing(0.0) + 0.5 * 0.16).epsilon(1e-14));
}

TEST_CASE("constant rate below threshold settles above the noise floor") {
  auto id = identity_spectrum(32);
  KernelPair kp(id, InitSpec::zero_start(1.0), 1.0);
  const double gamma0 = 0.8;
  auto traj = solve_volterra(kp, StepsizeRule::constant(gamma0), 40.0, 2e-3, 1.0);
  // Stationary point of the mode flow: D2 = gamma R, so
  // R = (omega^2/2) / (1 - gamma avg_eig / 2).
  const double stationary = 0.5 / (1.0 - 0.5 * gamma0 * kp.avg_eig());
  CHECK(traj.points.back().risk == doctest::Approx(stationary).epsilon(1e-4));
  // The noise floor is never undershot.
  for (const auto& p : traj.points) CHECK(p.risk >= 0.5 - 1e-12);
  // Adaptive decay (adagrad) does drive the risk to the floor itself.
  auto ada = solve_volterra(kp, StepsizeRule::adagrad(1.0, 1.0), 400.0, 5e-3, 10.0);
  CHECK(ada.points.back().risk == doctest::Approx(0.5).epsilon(2e-2));
}

TEST_CASE("volterra matches the mode flow") {
  auto model = RiskModel::least_squares(0.5);
  auto spec = two_point_spectrum(1.0, 0.25, 16);
  auto init = InitSpec::zero_start(1.0);
  auto rule = StepsizeRule::adagrad(1.0, 1.5);
  auto ode = solve_detflow(model, spec, rule, init, 5.0, 1e-3, 0.1);
  KernelPair kp(spec, init, 0.5);
  auto volt = solve_volterra(kp, rule, 5.0, 1e-3, 0.1);
  CHECK(sup_gap(ode, volt, 0) < 1e-3);
  CHECK(sup_gap(ode, volt, 1) < 1e-3);
}

TEST_CASE("noiseless risk dominates the forcing term") {
  auto spec = power_law_spectrum(0.2, 64);
  KernelPair kp(spec, InitSpec::powerlaw_residual(0.3), 0.0);
  auto traj = solve_volterra(kp, StepsizeRule::constant(0.5), 10.0, 1e-3, 0.25);
  double big_gamma = 0.0;
  for (std::size_t i = 1; i < traj.points.size(); ++i) {
    // Gamma accumulates 0.5 per unit time for the constant rule.
    big_gamma = 0.5 * traj.points[i].t;
    CHECK(traj.points[i].risk >= kp.forcing(big_gamma) - 1e-12);
  }
}

TEST_CASE("grid refinement is second order") {
  auto spec = two_point_spectrum(1.0, 0.5, 8);
  KernelPair kp(spec, InitSpec::zero_start(1.0), 0.0);
  auto rule = StepsizeRule::adagrad(1.0, 1.0);
  auto run = [&](double dt) { return solve_volterra(kp, rule, 4.0, dt, 0.5); };
  auto sup = [](const Trajectory& a, const Trajectory& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.points.size(); ++i)
      m = std::max(m, std::abs(a.points[i].risk - b.points[i].risk));
    return m;
  };
  auto c1 = run(0.01), c2 = run(0.005), c3 = run(0.0025);
  const double e12 = sup(c1, c2), e23 = sup(c2, c3);
  CHECK(e12 / e23 > 3.0);
  CHECK(e12 / e23 < 5.0);
}

TEST_CASE("kernel self-convolution bound at power-law spectra") {
  auto spec = power_law_spectrum(0.2, 256);
  KernelPair kp(spec, InitSpec::powerlaw_residual(0.0), 0.0);
  // int_0^t K(s) K(t-s) ds <= 2 K(t/2) ||K||_1, checked on a grid.
  for (double t : {0.5, 1.0, 2.0, 5.0, 10.0, 25.0}) {
    CHECK(kp.kernel_self_convolution(t) <= 2.0 * kp.kernel(0.5 * t) * kp.kernel_l1_norm() + 1e-12);
  }
  // Closed form against trapezoid quadrature.
  for (double t : {0.5, 2.0, 8.0}) {
    const int n = 20000;
    double quad = 0.0;
    for (int i = 0; i < n; ++i) {
      const double s0 = t * i / n, s1 = t * (i + 1) / n;
      quad += (t / n) * 0.5 * (kp.kernel(s0) * kp.kernel(t - s0) + kp.kernel(s1) * kp.kernel(t - s1));
    }
    CHECK(kp.kernel_self_convolution(t) == doctest::Approx(quad).epsilon(1e-6));
  }
}

TEST_CASE("envelopes bracket the solution when the contraction holds") {
  auto spec = power_law_spectrum(0.2, 128);
  auto init = InitSpec::powerlaw_residual(0.0);
  KernelPair kp(spec, init, 0.0);
  const double gamma0 = 0.5;
  REQUIRE(2.0 * kp.kernel_l1_norm() * gamma0 < 1.0);

  auto traj = solve_volterra(kp, StepsizeRule::constant(gamma0), 20.0, 2e-3, 0.5);
  std::vector<double> grid;
  for (const auto& p : traj.points) grid.push_back(p.t);
  auto env = lower_upper_envelopes(kp, gamma0, grid);
  REQUIRE(env.available);
  CHECK(env.constant_C > 1.0);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(traj.points[i].risk >= env.lower[i] - 1e-9);
    CHECK(traj.points[i].risk <= env.upper[i] + 1e-9);
  }
}

TEST_CASE("envelopes report unavailability") {
  auto id = identity_spectrum(8);
  KernelPair kp(id, InitSpec::zero_start(1.0), 0.0);
  // 2 ||K||_1 gamma0 = gamma0 >= 1: contraction fails.
  auto env = lower_upper_envelopes(kp, 1.5, {0.0, 1.0, 2.0});
  CHECK_FALSE(env.available);
  CHECK(env.reason.find("contraction") != std::string::npos);

  KernelPair noisy(id, InitSpec::zero_start(1.0), 0.5);
  auto env2 = lower_upper_envelopes(noisy, 0.5, {0.0, 1.0});
  CHECK_FALSE(env2.available);
}

TEST_CASE("volterra rejects rules that do not close over the risk") {
  auto id = identity_spectrum(8);
  KernelPair kp(id, InitSpec::zero_start(1.0), 0.0);
  CHECK_THROWS_AS(solve_volterra(kp, StepsizeRule::polyak_ls(), 1.0, 1e-3, 0.1),
                  std::invalid_argument);
  CHECK_THROWS_AS(solve_volterra(kp, StepsizeRule::rmsprop(1, 1, 1), 1.0, 1e-3, 0.1),
                  std::invalid_argument);
}
