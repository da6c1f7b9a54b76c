#include "sgdflow/riskmodel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sgdflow {

namespace {

constexpr double kPsdTol = 1e-10;
constexpr double kDetJitter = 1e-14;
constexpr double kCholJitter = 1e-12;

double softplus(double x) {
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

// sigmoid'(x) = g(x) (1 - g(x))
double sigmoid_prime(double x) {
  const double g = sigmoid(x);
  return g * (1.0 - g);
}

void check_psd(const CovB& b) {
  if (!b.is_psd(kPsdTol)) throw std::domain_error("riskmodel: B is not PSD within tolerance");
}

}  // namespace

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

RiskModel::RiskModel(ModelKind kind, double omega, int quadrature_nodes)
    : kind_(kind), omega_(omega), quadrature_nodes_(quadrature_nodes) {
  if (kind_ == ModelKind::logistic)
    quad_ = std::make_shared<const GaussHermiteRule>(quadrature_nodes_);
}

RiskModel RiskModel::least_squares(double omega) {
  if (!(omega >= 0.0)) throw std::invalid_argument("riskmodel: omega must be >= 0");
  return RiskModel(ModelKind::least_squares, omega, 0);
}

RiskModel RiskModel::logistic(int quadrature_nodes) {
  if (quadrature_nodes < 2)
    throw std::invalid_argument("riskmodel: quadrature needs at least 2 nodes");
  return RiskModel(ModelKind::logistic, 0.0, quadrature_nodes);
}

std::string RiskModel::name() const {
  return kind_ == ModelKind::least_squares ? "least_squares" : "logistic";
}

// Evaluates the logistic risk formula without the joint-PSD requirement:
// only b11 >= 0 and b22 >= 0 enter (the b12 dependence is linear), which
// lets finite differences step slightly outside the PSD cone.
double RiskModel::h_raw(double b11, double b12, double b22) const {
  b11 = std::max(b11, 0.0);
  b22 = std::max(b22, 0.0);
  const double s11 = std::sqrt(b11);
  const double s22 = std::sqrt(b22);
  const double cross = (b22 == 0.0)
                           ? sigmoid_prime(0.0)
                           : quad_->normal_expectation([&](double z) { return sigmoid_prime(s22 * z); });
  const double entropy = (b11 == 0.0)
                             ? softplus(0.0)
                             : quad_->normal_expectation([&](double w) { return softplus(s11 * w); });
  return -b12 * cross + entropy;
}

double RiskModel::h(const CovB& b) const {
  check_psd(b);
  if (kind_ == ModelKind::least_squares)
    return 0.5 * (b.b11 - 2.0 * b.b12 + b.b22) + 0.5 * omega_ * omega_;
  return h_raw(b.b11, b.b12, b.b22);
}

GradH RiskModel::grad_h(const CovB& b) const {
  check_psd(b);
  if (kind_ == ModelKind::least_squares) return {0.5, -0.5, 0.5};

  const double step =
      1e-5 * std::max({1.0, std::abs(b.b11), std::abs(b.b12), std::abs(b.b22)});
  auto central = [&](double lo, double hi, double width) {
    return (hi - lo) / width;
  };

  GradH g;
  // One-sided at the b11 >= 0 / b22 >= 0 boundary.
  if (b.b11 - step >= 0.0)
    g.h1 = central(h_raw(b.b11 - step, b.b12, b.b22), h_raw(b.b11 + step, b.b12, b.b22), 2.0 * step);
  else
    g.h1 = central(h_raw(b.b11, b.b12, b.b22), h_raw(b.b11 + step, b.b12, b.b22), step);
  g.h2 = 0.5 * central(h_raw(b.b11, b.b12 - step, b.b22), h_raw(b.b11, b.b12 + step, b.b22),
                       2.0 * step);
  if (b.b22 - step >= 0.0)
    g.h3 = central(h_raw(b.b11, b.b12, b.b22 - step), h_raw(b.b11, b.b12, b.b22 + step), 2.0 * step);
  else
    g.h3 = central(h_raw(b.b11, b.b12, b.b22), h_raw(b.b11, b.b12, b.b22 + step), step);
  return g;
}

double RiskModel::fisher_I(const CovB& b) const {
  check_psd(b);
  if (kind_ == ModelKind::least_squares)
    return b.b11 - 2.0 * b.b12 + b.b22 + omega_ * omega_;

  const double b11 = std::max(b.b11, 0.0);
  const double b22 = std::max(b.b22, 0.0);
  // A degenerate marginal collapses to a point mass at zero.
  if (b11 == 0.0 && b22 == 0.0) return 0.0;
  if (b11 == 0.0) {
    const double s = std::sqrt(b22);
    return quad_->normal_expectation([&](double z) {
      const double diff = sigmoid(0.0) - sigmoid(s * z);
      return diff * diff;
    });
  }
  if (b22 == 0.0) {
    const double s = std::sqrt(b11);
    return quad_->normal_expectation([&](double z) {
      const double diff = sigmoid(s * z) - sigmoid(0.0);
      return diff * diff;
    });
  }

  double vb11 = b11;
  double vb22 = b22;
  double det = vb11 * vb22 - b.b12 * b.b12;
  if (det < kDetJitter) {
    vb11 += kCholJitter;
    vb22 += kCholJitter;
  }
  const double l11 = std::sqrt(vb11);
  const double l21 = b.b12 / l11;
  const double rem = std::max(vb22 - l21 * l21, 0.0);
  const double l22 = std::sqrt(rem);
  return quad_->normal_expectation_2d(l11, l21, l22, [](double x, double y) {
    const double diff = sigmoid(x) - sigmoid(y);
    return diff * diff;
  });
}

double RiskModel::f_prime(double x, double xstar, double eps) const {
  if (kind_ == ModelKind::least_squares) return x - xstar - eps;
  return sigmoid(x) - sigmoid(xstar);
}

}  // namespace sgdflow
