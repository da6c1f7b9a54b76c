#pragma once

#include <string>
#include <vector>

#include "sgdflow/detflow.hpp"
#include "sgdflow/spectrum.hpp"
#include "sgdflow/stepsize.hpp"
#include "sgdflow/trajectory.hpp"

namespace sgdflow {

// Ingredients of the least-squares risk integral equation in accumulated
// learning-rate time: the forcing kernel F and memory kernel K are weighted
// exponential sums over the spectrum with the initial per-mode residuals.
class KernelPair {
 public:
  KernelPair(const Spectrum& spectrum, std::vector<double> d2_init, double omega);
  KernelPair(const Spectrum& spectrum, const InitSpec& init, double omega);

  // F(x) = (1/2) sum_i w_i lambda_i D_i^2(0) exp(-2 lambda_i x)
  double forcing(double x) const;
  // K(x) = sum_i w_i lambda_i^2 exp(-2 lambda_i x)
  double kernel(double x) const;
  // int_0^x K(s) K(x-s) ds, in closed form.
  double kernel_self_convolution(double x) const;
  // ||K||_1 = avg_eig / 2.
  double kernel_l1_norm() const { return 0.5 * avg_eig_; }

  double avg_eig() const { return avg_eig_; }
  double avg_eig2() const { return avg_eig2_; }
  double omega() const { return omega_; }
  const std::vector<double>& lambdas() const { return lambda_; }
  const std::vector<double>& weights() const { return weight_; }
  const std::vector<double>& d2_init() const { return d2_init_; }

 private:
  std::vector<double> lambda_, weight_, d2_init_;
  double avg_eig_ = 0.0;
  double avg_eig2_ = 0.0;
  double omega_ = 0.0;
};

// Marches the risk integral equation
//   R(t) = F(Gamma(t)) + omega^2/2 + int_0^t gamma_s^2 K(Gamma(t)-Gamma(s)) R(s) ds
// on a uniform grid with trapezoidal memory quadrature and a two-pass
// corrector for the same-step coupling. Supports constant and AdaGrad-Norm
// rules (whose gamma depends on the risk history only through int R).
Trajectory solve_volterra(const KernelPair& kp, const StepsizeRule& rule, double t_end,
                          double dt, double record_every);

// Risk envelopes for constant learning rate (noiseless): the solution is
// bracketed by
//   lower(t) = F + int gamma^2 K F,   upper(t) = F + C * (same integral)
// whenever 2 ||K||_1 (1+eps) gamma0 < 1 and the kernel self-convolution is
// dominated by 2 (1+eps) ||K||_1 K beyond some horizon T.
struct EnvelopeResult {
  bool available = false;
  std::string reason;
  std::vector<double> t;
  std::vector<double> lower;
  std::vector<double> upper;
  double epsilon = 0.0;
  double horizon_T = 0.0;
  double constant_C = 0.0;
};

EnvelopeResult lower_upper_envelopes(const KernelPair& kp, double gamma0,
                                     const std::vector<double>& t_grid);

}  // namespace sgdflow
