#pragma once

#include "sgdflow/riskmodel.hpp"

namespace sgdflow {

// Scalar statistics of the deterministic flow at one instant. Everything a
// learning-rate rule may consume is carried here so rules stay decoupled
// from the solver internals.
struct Observables {
  CovB B;              // sum_i w_i lambda_i V_i
  CovB N;              // sum_i w_i V_i
  double risk = 0.0;   // h(B)
  double fisher = 0.0; // I(B)
  double d2 = 0.0;     // sum_i w_i D_i^2
  double wl2d2 = 0.0;  // sum_i w_i lambda_i^2 D_i^2
  double gamma = 0.0;
  double avg_eig = 0.0;
  double avg_eig2 = 0.0;
  double omega2 = 0.0;
};

}  // namespace sgdflow
