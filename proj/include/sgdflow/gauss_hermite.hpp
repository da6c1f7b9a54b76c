#pragma once

#include <vector>

namespace sgdflow {

// Gauss-Hermite rule in the physicists' convention:
//   integral exp(-x^2) f(x) dx  ~=  sum_i weight[i] * f(node[i]).
// Expectations over N(0,1) use E[f(Z)] = (1/sqrt(pi)) sum_i w_i f(sqrt(2) x_i).
struct GaussHermiteRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  explicit GaussHermiteRule(int n);

  // E[f(Z)] for Z ~ N(0,1).
  template <typename F>
  double normal_expectation(F&& f) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) acc += weights[i] * f(scaled_nodes_[i]);
    return acc * inv_sqrt_pi_;
  }

  // E[f(X, Y)] for (X, Y) centered Gaussian with Cholesky factor
  // [[l11, 0], [l21, l22]], evaluated on the tensorized rule.
  template <typename F>
  double normal_expectation_2d(double l11, double l21, double l22, F&& f) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const double zi = scaled_nodes_[i];
      const double x = l11 * zi;
      double inner = 0.0;
      for (std::size_t j = 0; j < nodes.size(); ++j) {
        const double zj = scaled_nodes_[j];
        inner += weights[j] * f(x, l21 * zi + l22 * zj);
      }
      acc += weights[i] * inner;
    }
    return acc * inv_sqrt_pi_ * inv_sqrt_pi_;
  }

 private:
  std::vector<double> scaled_nodes_;  // sqrt(2) * nodes
  double inv_sqrt_pi_ = 0.0;
};

}  // namespace sgdflow
