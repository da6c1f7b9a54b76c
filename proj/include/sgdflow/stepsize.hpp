#pragma once

#include <optional>
#include <string>

#include "sgdflow/observables.hpp"

namespace sgdflow {

enum class RuleKind {
  constant,
  adagrad_norm,
  rmsprop_norm,
  exact_line_search_ls,
  polyak_ls,
};

// Learning-rate rule descriptor. Immutable; the evolving part lives in
// RuleState (deterministic flow) or DiscreteRuleState (SGD).
struct StepsizeRule {
  RuleKind kind = RuleKind::constant;
  double gamma0 = 1.0;  // constant
  double b = 1.0;       // adagrad / rmsprop
  double eta = 1.0;     // adagrad / rmsprop
  double alpha = 1.0;   // rmsprop decay

  static StepsizeRule constant(double gamma0);
  static StepsizeRule adagrad(double b, double eta);
  static StepsizeRule rmsprop(double b, double eta, double alpha);
  static StepsizeRule line_search_ls();
  static StepsizeRule polyak_ls();

  std::string name() const;
  bool is_idealized() const {
    return kind == RuleKind::exact_line_search_ls || kind == RuleKind::polyak_ls;
  }
};

// ODE-internal state of the deterministic rule: acc_I accumulates
// int_0^t I(B(s)) ds for AdaGrad-Norm; ema carries E(t) with E(0) = b^2 for
// RMSprop-Norm. Unused fields stay zero.
struct RuleState {
  double acc_I = 0.0;
  double ema = 0.0;
};

RuleState initial_rule_state(const StepsizeRule& rule);

// Deterministic learning rate gamma_t. For line search / Polyak with
// vanished risk (underflow below 1e-300) returns nullopt: the caller treats
// the trajectory as converged and freezes gamma.
std::optional<double> gamma_det(const StepsizeRule& rule, const RuleState& state,
                                const Observables& obs);

// Time derivative of the rule-internal state, integrated jointly with the
// mode ODEs.
RuleState rule_state_derivative(const StepsizeRule& rule, const RuleState& state,
                                const Observables& obs);

// Largest gamma keeping the deterministic risk decreasing; equals twice the
// line-search rate.
double risk_stability_threshold(const Observables& obs);

// Largest gamma keeping the distance to optimality decreasing; equals twice
// the Polyak rate.
double distance_stability_threshold(const Observables& obs);

// State of the discrete stochastic rule: bk2 holds b_k^2 for AdaGrad-Norm
// (b_0 = b*d) and RMSprop-Norm.
struct DiscreteRuleState {
  double bk2 = 0.0;
};

DiscreteRuleState initial_discrete_state(const StepsizeRule& rule, int d);

// Stochastic learning rate g_k used in the update X - (g_k/d) grad. AdaGrad
// and RMSprop consume the squared norm of the current sample gradient;
// the idealized rules consume exact population observables.
double gamma_discrete(const StepsizeRule& rule, DiscreteRuleState& state, int d,
                      double grad_sq_norm, const Observables& obs);

// Nominal rate before the first sample (what a trajectory records at t=0).
double gamma_discrete_initial(const StepsizeRule& rule, const Observables& obs);

}  // namespace sgdflow
