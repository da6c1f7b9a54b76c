#include <cmath>
#include <random>
#include <stdexcept>

#include "doctest.h"
#include "sgdflow/spectrum.hpp"

using namespace sgdflow;

TEST_CASE("two-point spectrum basics") {
  auto s = two_point_spectrum(1.0, 0.5, 400);
  CHECK(s.avg_eig() == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(s.avg_eig2() == doctest::Approx(0.625).epsilon(1e-15));
  CHECK(s.num_groups() == 2);

  auto s2 = two_point_spectrum(1.0, 0.25, 400);
  CHECK(s2.lambda_min() == 0.25);
  CHECK(s2.lambda_max() == 1.0);

  CHECK_THROWS_AS(two_point_spectrum(1.0, 1.0, 400), std::invalid_argument);
  CHECK_THROWS_AS(two_point_spectrum(0.5, 1.0, 400), std::invalid_argument);
  CHECK_THROWS_AS(two_point_spectrum(1.0, -0.5, 400), std::invalid_argument);
  CHECK_THROWS_AS(two_point_spectrum(1.0, 0.5, 401), std::invalid_argument);
}

TEST_CASE("power law quantiles") {
  auto s = power_law_spectrum(0.0, 4);
  REQUIRE(s.num_groups() == 4);
  CHECK(s.groups()[0].lambda == doctest::Approx(0.125).epsilon(1e-15));
  CHECK(s.groups()[1].lambda == doctest::Approx(0.375).epsilon(1e-15));
  CHECK(s.groups()[2].lambda == doctest::Approx(0.625).epsilon(1e-15));
  CHECK(s.groups()[3].lambda == doctest::Approx(0.875).epsilon(1e-15));

  auto s5 = power_law_spectrum(0.5, 2);
  CHECK(s5.groups()[0].lambda == doctest::Approx(0.0625).epsilon(1e-14));
  CHECK(s5.groups()[1].lambda == doctest::Approx(0.5625).epsilon(1e-14));

  CHECK_THROWS_AS(power_law_spectrum(1.0, 4), std::invalid_argument);
  CHECK_THROWS_AS(power_law_spectrum(-0.1, 4), std::invalid_argument);
}

TEST_CASE("power law moments match the density integrals") {
  // E[lambda^k] under (1-beta) lambda^(-beta) on (0,1) is (1-beta)/(k+1-beta).
  const double beta = 0.2;
  auto s = power_law_spectrum(beta, 10000);
  CHECK(s.avg_eig() == doctest::Approx((1.0 - beta) / (2.0 - beta)).epsilon(1e-3));
  CHECK(s.avg_eig2() == doctest::Approx((1.0 - beta) / (3.0 - beta)).epsilon(1e-3));
}

TEST_CASE("cond spectrum normalization and spread") {
  for (double s_par : {2.1, 4.0, 5.5}) {
    auto s = cond_spectrum(s_par, 1000);
    CHECK(s.avg_eig2() == doctest::Approx(1.0).epsilon(1e-12));
  }
  auto wide = cond_spectrum(2.1, 1000);
  auto narrow = cond_spectrum(5.5, 1000);
  CHECK(wide.lambda_max() / wide.lambda_min() > narrow.lambda_max() / narrow.lambda_min());
  CHECK_THROWS_AS(cond_spectrum(2.0, 100), std::invalid_argument);

  // Hand evaluation at s=4, d=4.
  double sum = 0.0;
  for (int j = 1; j <= 4; ++j) sum += std::pow(j / 5.0, -0.5);
  const double pref = std::sqrt(4.0 / sum);
  auto s4 = cond_spectrum(4.0, 4);
  for (int i = 1; i <= 4; ++i)
    CHECK(s4.groups()[static_cast<std::size_t>(i - 1)].lambda ==
          doctest::Approx(pref * std::pow(i / 5.0, -0.25)).epsilon(1e-14));
}

TEST_CASE("identity and explicit spectra") {
  auto id = identity_spectrum(500);
  REQUIRE(id.num_groups() == 1);
  CHECK(id.groups()[0].lambda == 1.0);
  CHECK(id.groups()[0].weight == 1.0);

  auto ex = explicit_spectrum({1.0, 1.0, 2.0});
  REQUIRE(ex.num_groups() == 2);
  CHECK(ex.groups()[0].lambda == 1.0);
  CHECK(ex.groups()[0].weight == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(ex.groups()[1].lambda == 2.0);
  CHECK(ex.groups()[1].weight == doctest::Approx(1.0 / 3.0).epsilon(1e-15));

  CHECK_THROWS_AS(explicit_spectrum({}), std::invalid_argument);
  CHECK_THROWS_AS((explicit_spectrum({1.0, -1.0})), std::invalid_argument);
}

TEST_CASE("weights sum to one and moments are the weighted sums") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unif(0.1, 5.0);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<double> lambdas;
    const int d = 1 + static_cast<int>(rng() % 50);
    for (int i = 0; i < d; ++i) lambdas.push_back(unif(rng));
    auto s = explicit_spectrum(lambdas);
    double wsum = 0.0, m1 = 0.0, m2 = 0.0;
    for (const auto& g : s.groups()) {
      wsum += g.weight;
      m1 += g.weight * g.lambda;
      m2 += g.weight * g.lambda * g.lambda;
    }
    CHECK(std::abs(wsum - 1.0) <= 1e-12);
    CHECK(m1 == doctest::Approx(s.avg_eig()).epsilon(1e-15));
    CHECK(m2 == doctest::Approx(s.avg_eig2()).epsilon(1e-15));
  }
}

TEST_CASE("grouping round-trips through expansion") {
  auto s = explicit_spectrum({3.0, 1.0, 1.0, 2.0, 2.0, 2.0});
  auto expanded = s.expand();
  REQUIRE(expanded.size() == 6);
  auto regrouped = explicit_spectrum(expanded);
  REQUIRE(regrouped.num_groups() == s.num_groups());
  for (std::size_t i = 0; i < s.num_groups(); ++i) {
    CHECK(regrouped.groups()[i].lambda == s.groups()[i].lambda);
    CHECK(regrouped.groups()[i].weight == s.groups()[i].weight);
  }
}

TEST_CASE("text serialization round-trip") {
  auto s = two_point_spectrum(1.5, 0.25, 64);
  auto text = s.to_text();
  CHECK(text.rfind("# d=64", 0) == 0);
  auto back = Spectrum::from_text(text);
  CHECK(back.d() == s.d());
  REQUIRE(back.num_groups() == s.num_groups());
  for (std::size_t i = 0; i < s.num_groups(); ++i) {
    CHECK(back.groups()[i].lambda == s.groups()[i].lambda);
    CHECK(back.groups()[i].weight == s.groups()[i].weight);
  }
}
