#pragma once

#include <memory>
#include <string>

#include "sgdflow/gauss_hermite.hpp"

namespace sgdflow {

// Covariance of the Gaussian pair (<a,X>, <a,X*>). Symmetric by
// construction; PSD up to a roundoff tolerance of 1e-10 on the determinant.
struct CovB {
  double b11 = 0.0;
  double b12 = 0.0;
  double b22 = 0.0;

  bool is_psd(double tol = 1e-10) const {
    return b11 >= -tol && b22 >= -tol && b11 * b22 - b12 * b12 >= -tol;
  }
};

enum class ModelKind { least_squares, logistic };

// Gradient of the risk representation h with respect to the 2x2 covariance,
// in the symmetric matrix convention [[h1, h2], [h2, h3]]: the total
// differential is dh = h1 db11 + 2 h2 db12 + h3 db22.
struct GradH {
  double h1 = 0.0;
  double h2 = 0.0;
  double h3 = 0.0;
};

// Low-dimensional description of a learning problem: the risk h(B), the
// Fisher function I(B), and the per-sample derivative f'. Least squares
// carries the label-noise level omega; logistic integrals are evaluated by
// Gauss-Hermite quadrature with a configurable node count.
class RiskModel {
 public:
  static RiskModel least_squares(double omega);
  static RiskModel logistic(int quadrature_nodes = 64);

  ModelKind kind() const { return kind_; }
  double omega() const { return omega_; }
  int quadrature_nodes() const { return quadrature_nodes_; }
  std::string name() const;

  // Expected risk as a function of B. Throws std::domain_error when B is
  // not PSD beyond tolerance.
  double h(const CovB& b) const;

  // Least squares: exactly (1/2, -1/2, 1/2). Logistic: central finite
  // differences of h (the off-diagonal slope halved per the symmetric
  // matrix convention).
  GradH grad_h(const CovB& b) const;

  // E[(f')^2] under (x, x*) ~ N(0, B).
  double fisher_I(const CovB& b) const;

  // Derivative of the per-sample loss in its first argument.
  double f_prime(double x, double xstar, double eps) const;

 private:
  RiskModel(ModelKind kind, double omega, int quadrature_nodes);

  double h_raw(double b11, double b12, double b22) const;

  ModelKind kind_;
  double omega_ = 0.0;
  int quadrature_nodes_ = 0;
  std::shared_ptr<const GaussHermiteRule> quad_;
};

double sigmoid(double x);

}  // namespace sgdflow
