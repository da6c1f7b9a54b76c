#include "sgdflow/stepsize.hpp"

#include <cmath>
#include <stdexcept>

namespace sgdflow {

namespace {

constexpr double kRiskFloor = 1e-300;

double require_positive_radicand(double x) {
  if (!(x > 0.0)) throw std::runtime_error("stepsize: non-positive radicand (invariant breach)");
  return x;
}

}  // namespace

StepsizeRule StepsizeRule::constant(double gamma0) {
  if (!(gamma0 >= 0.0)) throw std::invalid_argument("stepsize: gamma0 must be >= 0");
  StepsizeRule r;
  r.kind = RuleKind::constant;
  r.gamma0 = gamma0;
  return r;
}

StepsizeRule StepsizeRule::adagrad(double b, double eta) {
  if (!(b > 0.0) || !(eta > 0.0))
    throw std::invalid_argument("stepsize: adagrad needs b > 0 and eta > 0");
  StepsizeRule r;
  r.kind = RuleKind::adagrad_norm;
  r.b = b;
  r.eta = eta;
  return r;
}

StepsizeRule StepsizeRule::rmsprop(double b, double eta, double alpha) {
  if (!(b > 0.0) || !(eta > 0.0) || !(alpha > 0.0))
    throw std::invalid_argument("stepsize: rmsprop needs b, eta, alpha > 0");
  StepsizeRule r;
  r.kind = RuleKind::rmsprop_norm;
  r.b = b;
  r.eta = eta;
  r.alpha = alpha;
  return r;
}

StepsizeRule StepsizeRule::line_search_ls() {
  StepsizeRule r;
  r.kind = RuleKind::exact_line_search_ls;
  return r;
}

StepsizeRule StepsizeRule::polyak_ls() {
  StepsizeRule r;
  r.kind = RuleKind::polyak_ls;
  return r;
}

std::string StepsizeRule::name() const {
  switch (kind) {
    case RuleKind::constant: return "constant";
    case RuleKind::adagrad_norm: return "adagrad";
    case RuleKind::rmsprop_norm: return "rmsprop";
    case RuleKind::exact_line_search_ls: return "linesearch";
    case RuleKind::polyak_ls: return "polyak";
  }
  return "unknown";
}

RuleState initial_rule_state(const StepsizeRule& rule) {
  RuleState s;
  if (rule.kind == RuleKind::rmsprop_norm) s.ema = rule.b * rule.b;
  return s;
}

std::optional<double> gamma_det(const StepsizeRule& rule, const RuleState& state,
                                const Observables& obs) {
  switch (rule.kind) {
    case RuleKind::constant:
      return rule.gamma0;
    case RuleKind::adagrad_norm:
      return rule.eta /
             std::sqrt(require_positive_radicand(rule.b * rule.b + obs.avg_eig * state.acc_I));
    case RuleKind::rmsprop_norm:
      return rule.eta / std::sqrt(require_positive_radicand(state.ema));
    case RuleKind::exact_line_search_ls:
      if (obs.risk < kRiskFloor) return std::nullopt;
      return obs.wl2d2 / (2.0 * obs.avg_eig2 * obs.risk);
    case RuleKind::polyak_ls:
      if (obs.risk < kRiskFloor) return std::nullopt;
      return (2.0 * obs.risk - obs.omega2) / (2.0 * obs.avg_eig * obs.risk);
  }
  throw std::logic_error("stepsize: unknown rule kind");
}

RuleState rule_state_derivative(const StepsizeRule& rule, const RuleState& state,
                                const Observables& obs) {
  RuleState d;
  if (rule.kind == RuleKind::adagrad_norm) {
    d.acc_I = obs.fisher;
  } else if (rule.kind == RuleKind::rmsprop_norm) {
    d.ema = -rule.alpha * state.ema + obs.avg_eig * obs.fisher;
  }
  return d;
}

double risk_stability_threshold(const Observables& obs) {
  return obs.wl2d2 / (obs.avg_eig2 * obs.risk);
}

double distance_stability_threshold(const Observables& obs) {
  return (2.0 * obs.risk - obs.omega2) / (obs.avg_eig * obs.risk);
}

DiscreteRuleState initial_discrete_state(const StepsizeRule& rule, int d) {
  DiscreteRuleState s;
  if (rule.kind == RuleKind::adagrad_norm || rule.kind == RuleKind::rmsprop_norm) {
    const double b0 = rule.b * d;
    s.bk2 = b0 * b0;
  }
  return s;
}

double gamma_discrete(const StepsizeRule& rule, DiscreteRuleState& state, int d,
                      double grad_sq_norm, const Observables& obs) {
  switch (rule.kind) {
    case RuleKind::constant:
      return rule.gamma0;
    case RuleKind::adagrad_norm:
      state.bk2 += grad_sq_norm;
      return d * rule.eta / std::sqrt(require_positive_radicand(state.bk2));
    case RuleKind::rmsprop_norm:
      state.bk2 = rule.alpha * state.bk2 + (1.0 - rule.alpha) * grad_sq_norm;
      return d * rule.eta / std::sqrt(require_positive_radicand(state.bk2));
    case RuleKind::exact_line_search_ls:
      if (obs.risk < kRiskFloor) return 0.0;
      return obs.wl2d2 / (2.0 * obs.avg_eig2 * obs.risk);
    case RuleKind::polyak_ls:
      if (obs.risk < kRiskFloor) return 0.0;
      return (2.0 * obs.risk - obs.omega2) / (2.0 * obs.avg_eig * obs.risk);
  }
  throw std::logic_error("stepsize: unknown rule kind");
}

double gamma_discrete_initial(const StepsizeRule& rule, const Observables& obs) {
  switch (rule.kind) {
    case RuleKind::constant: return rule.gamma0;
    case RuleKind::adagrad_norm:
    case RuleKind::rmsprop_norm: return rule.eta / rule.b;
    case RuleKind::exact_line_search_ls:
    case RuleKind::polyak_ls: {
      RuleState s;
      auto g = gamma_det(rule, s, obs);
      return g.value_or(0.0);
    }
  }
  throw std::logic_error("stepsize: unknown rule kind");
}

}  // namespace sgdflow
