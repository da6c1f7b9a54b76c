#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace sgdflow {

// Eigenvalue spectrum of a data covariance matrix, stored as weighted
// groups: repeated eigenvalues are collapsed so per-mode computations
// scale with the number of distinct eigenvalues rather than the ambient
// dimension d. Weights are multiplicity fractions and sum to one.
struct SpectrumGroup {
  double lambda = 0.0;
  double weight = 0.0;
};

class Spectrum {
 public:
  Spectrum(std::vector<SpectrumGroup> groups, int d);

  const std::vector<SpectrumGroup>& groups() const { return groups_; }
  int d() const { return d_; }
  std::size_t num_groups() const { return groups_.size(); }

  // Tr(K)/d and Tr(K^2)/d.
  double avg_eig() const { return avg_eig_; }
  double avg_eig2() const { return avg_eig2_; }
  double lambda_min() const;
  double lambda_max() const;

  // Expands the weighted groups back to a multiset of d eigenvalues.
  // Requires every weight*d to be integral (true for all constructors).
  std::vector<double> expand() const;

  // Plain-text form: "# d=<int>" header, then one "lambda,weight" per line.
  std::string to_text() const;
  static Spectrum from_text(const std::string& text);

 private:
  std::vector<SpectrumGroup> groups_;
  int d_ = 0;
  double avg_eig_ = 0.0;
  double avg_eig2_ = 0.0;
};

// d/2 eigenvalues at lambda1 and d/2 at lambda2. Requires lambda1 > lambda2 > 0
// and even d.
Spectrum two_point_spectrum(double lambda1, double lambda2, int d);

// Midpoint-quantile discretization of the density (1-beta) * lambda^(-beta)
// on (0,1): lambda_i = ((i - 1/2)/d)^(1/(1-beta)), each with weight 1/d.
// Requires 0 <= beta < 1.
Spectrum power_law_spectrum(double beta, int d);

// lambda_i = sqrt(d / sum_j (j/(d+1))^(-2/s)) * (i/(d+1))^(-1/s). The
// prefactor forces sum lambda_i^2 = d, i.e. Tr(K^2)/d = 1. Spread grows as
// s approaches 2. Requires s > 2.
Spectrum cond_spectrum(double s, int d);

// All eigenvalues equal to one.
Spectrum identity_spectrum(int d);

// Groups an explicit eigenvalue list (entries >= 0, nonempty).
Spectrum explicit_spectrum(const std::vector<double>& lambdas);

}  // namespace sgdflow
