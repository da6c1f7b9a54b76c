#include "sgdflow/asymptotics.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace sgdflow {

namespace {

void check_two_point(double l1, double l2) {
  if (!(l2 > 0.0) || !(l1 >= l2))
    throw std::invalid_argument("asymptotics: requires lambda1 >= lambda2 > 0");
}

}  // namespace

double line_search_limit_radical(double l1, double l2) {
  check_two_point(l1, l2);
  const double p2 = l1 * l1, q2 = l2 * l2;
  const double p3 = p2 * l1, q3 = q2 * l2;
  const double disc = p3 * p3 - 4.0 * p3 * p2 * l2 + 8.0 * p2 * p2 * q2 - 6.0 * p3 * q3 +
                      8.0 * p2 * q2 * q2 - 4.0 * l1 * q3 * q2 + q3 * q3;
  if (disc < 0.0) throw std::runtime_error("asymptotics: negative discriminant");
  const double num = p3 + 2.0 * p2 * l2 + 2.0 * l1 * q2 + q3 - std::sqrt(disc);
  const double den = (p2 + q2) * (p2 + q2);
  return num / den;
}

double line_search_limit_via_root(double l1, double l2) {
  check_two_point(l1, l2);
  // P(x) = l1 l2 (x+1)(l2 x - l1) + (l2-l1)^3 x, expanded to a x^2 + b x + c.
  const double a = l1 * l2 * l2;
  const double diff = l2 - l1;
  const double b = l1 * l2 * diff + diff * diff * diff;
  const double c = -l1 * l1 * l2;
  // a > 0 and c < 0, so exactly one root is positive.
  const double disc = b * b - 4.0 * a * c;
  if (disc < 0.0) throw std::runtime_error("asymptotics: negative discriminant");
  const double x = (-b + std::sqrt(disc)) / (2.0 * a);
  if (!(x > 0.0)) throw std::runtime_error("asymptotics: no positive root");
  return 2.0 * (l1 * l1 + l2 * l2 * x) / ((l1 + l2 * x) * (l1 * l1 + l2 * l2));
}

double line_search_limit(double l1, double l2) {
  const double direct = line_search_limit_radical(l1, l2);
  const double via_root = line_search_limit_via_root(l1, l2);
  if (std::abs(direct - via_root) > 1e-12 * std::max(1.0, std::abs(direct)))
    throw std::runtime_error("asymptotics: limit formulas disagree beyond 1e-12");
  return direct;
}

AdagradLimitBracket adagrad_limit_bracket(double b, double eta, double avg_eig, double d2_0,
                                          double gamma0) {
  if (!(b > 0.0) || !(eta > 0.0) || !(avg_eig > 0.0) || !(d2_0 >= 0.0))
    throw std::invalid_argument("asymptotics: bad adagrad bracket inputs");
  AdagradLimitBracket out;
  if (avg_eig > b / eta) {
    out.reason = "hypothesis avg_eig <= b/eta violated";
    return out;
  }
  const double contraction = 1.0 - 0.5 * gamma0 * avg_eig;
  if (!(contraction > 0.0)) {
    out.reason = "gamma0 avg_eig / 2 must stay below 1";
    return out;
  }
  out.available = true;
  out.central = eta * eta / (b / eta + 0.25 * avg_eig * d2_0);
  out.upper = out.central;
  out.lower = eta * eta / (b / eta + avg_eig * 0.25 * d2_0 / contraction);
  return out;
}

PowerLawRates power_law_rates(double beta, double delta) {
  if (!(beta >= 0.0) || !(beta < 1.0))
    throw std::invalid_argument("asymptotics: requires 0 <= beta < 1");
  if (!(delta >= 0.0)) throw std::invalid_argument("asymptotics: requires delta >= 0");
  const double sum = beta + delta;
  if (sum > 2.0) throw std::invalid_argument("asymptotics: requires beta + delta <= 2");

  PowerLawRates out;
  out.beta = beta;
  out.delta = delta;
  if (sum < 1.0) {
    out.regime = PowerLawRegime::fast;
    out.risk_exponent = sum - 2.0;
    out.gamma_exponent = 0.0;
    out.risk_descriptor = "t^(beta+delta-2)";
    out.gamma_descriptor = "constant";
  } else if (sum == 1.0) {
    out.regime = PowerLawRegime::critical;
    out.risk_exponent = -1.0;
    out.gamma_exponent = 0.0;
    out.risk_descriptor = "(t/log(t+1))^(-1)";
    out.gamma_descriptor = "1/log(t+1)";
  } else {
    out.regime = PowerLawRegime::slow;
    out.risk_exponent = -2.0 / sum + 1.0;
    out.gamma_exponent = -1.0 + 1.0 / sum;
    out.risk_descriptor = "t^(-2/(beta+delta)+1)";
    out.gamma_descriptor = "t^(-1+1/(beta+delta))";
  }
  return out;
}

KappaPair kappa_exponents(double beta, double delta) {
  if (!(beta >= 0.0) || !(beta < 1.0) || !(delta >= 0.0) || beta + delta > 2.0)
    throw std::invalid_argument("asymptotics: kappa exponents out of range");
  return {2.0 - beta - delta, 3.0 - beta};
}

StronglyConvexBound strongly_convex_lower_bound(double mu_hat, double l_hat, double avg_eig,
                                                double eta, double b, double zeta,
                                                double d2_0) {
  if (!(zeta > 0.0) || !(zeta < 1.0))
    throw std::invalid_argument("asymptotics: zeta must lie in (0,1)");
  if (!(mu_hat > 0.0) || !(l_hat > 0.0) || !(avg_eig > 0.0) || !(eta > 0.0) || !(b > 0.0) ||
      !(d2_0 >= 0.0))
    throw std::invalid_argument("asymptotics: bad strongly convex bound inputs");
  const double gamma0 = eta / b;
  const double required = 2.0 * mu_hat * zeta / (l_hat * l_hat * avg_eig);
  if (std::abs(gamma0 - required) > 1e-9 * std::max(1.0, required))
    throw std::invalid_argument(
        "asymptotics: gamma0 = eta/b must equal 2 mu zeta / (L^2 avg_eig)");
  StronglyConvexBound out;
  out.primary = gamma0 * eta * eta / (1.0 + zeta / (1.0 - zeta) * d2_0);
  out.expanded =
      eta * eta /
      (b / eta + avg_eig * l_hat * l_hat / (2.0 * mu_hat * (1.0 - zeta)) * d2_0);
  return out;
}

double noisy_adagrad_asymptote(double b, double eta, double omega, double avg_eig, double t) {
  return eta / std::sqrt(b * b + omega * omega * avg_eig * t);
}

double fit_loglog_slope(const Trajectory& traj, int field, double t_lo, double t_hi) {
  if (!(t_hi > t_lo) || !(t_lo > 0.0))
    throw std::invalid_argument("asymptotics: need t_hi > t_lo > 0");
  std::vector<double> xs, ys;
  for (const auto& p : traj.points) {
    if (p.t < t_lo || p.t > t_hi) continue;
    const double v = (field == 0) ? p.risk : p.gamma;
    if (!(v > 0.0) || !(p.t > 0.0)) continue;
    xs.push_back(std::log(p.t));
    ys.push_back(std::log(v));
  }
  if (xs.size() < 8)
    throw std::invalid_argument("asymptotics: fewer than 8 records in the fit window");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= static_cast<double>(xs.size());
  my /= static_cast<double>(xs.size());
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (!(sxx > 0.0)) throw std::invalid_argument("asymptotics: degenerate fit window");
  return sxy / sxx;
}

}  // namespace sgdflow
