#include "sgdflow/gauss_hermite.hpp"

#include <cmath>
#include <stdexcept>

namespace sgdflow {

// Nodes are the roots of the n-th Hermite polynomial, found by Newton
// iteration on the scaled recurrence (stable up to a few hundred nodes).
// Classic gauher scheme; asymptotic initial guesses per root.
GaussHermiteRule::GaussHermiteRule(int n) {
  if (n < 1) throw std::invalid_argument("gauss_hermite: need at least one node");
  nodes.assign(static_cast<std::size_t>(n), 0.0);
  weights.assign(static_cast<std::size_t>(n), 0.0);

  const double pim4 = 0.7511255444649425;  // pi^(-1/4)
  const int m = (n + 1) / 2;
  double z = 0.0;
  for (int i = 0; i < m; ++i) {
    if (i == 0) {
      z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -0.16667);
    } else if (i == 1) {
      z -= 1.14 * std::pow(static_cast<double>(n), 0.426) / z;
    } else if (i == 2) {
      z = 1.86 * z - 0.86 * nodes[0];
    } else if (i == 3) {
      z = 1.91 * z - 0.91 * nodes[1];
    } else {
      z = 2.0 * z - nodes[static_cast<std::size_t>(i) - 2];
    }
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p1 = pim4;
      double p2 = 0.0;
      for (int j = 0; j < n; ++j) {
        double p3 = p2;
        p2 = p1;
        p1 = z * std::sqrt(2.0 / (j + 1.0)) * p2 - std::sqrt(static_cast<double>(j) / (j + 1.0)) * p3;
      }
      pp = std::sqrt(2.0 * n) * p2;
      double z1 = z;
      z = z1 - p1 / pp;
      if (std::abs(z - z1) <= 1e-15) break;
    }
    nodes[static_cast<std::size_t>(i)] = z;
    nodes[static_cast<std::size_t>(n - 1 - i)] = -z;
    weights[static_cast<std::size_t>(i)] = 2.0 / (pp * pp);
    weights[static_cast<std::size_t>(n - 1 - i)] = weights[static_cast<std::size_t>(i)];
  }

  // Roots come out descending; flip to ascending.
  for (int i = 0; i < n / 2; ++i) {
    std::swap(nodes[static_cast<std::size_t>(i)], nodes[static_cast<std::size_t>(n - 1 - i)]);
    std::swap(weights[static_cast<std::size_t>(i)], weights[static_cast<std::size_t>(n - 1 - i)]);
  }

  scaled_nodes_.resize(nodes.size());
  const double sqrt2 = std::sqrt(2.0);
  for (std::size_t i = 0; i < nodes.size(); ++i) scaled_nodes_[i] = sqrt2 * nodes[i];
  inv_sqrt_pi_ = 1.0 / std::sqrt(std::acos(-1.0));
}

}  // namespace sgdflow
