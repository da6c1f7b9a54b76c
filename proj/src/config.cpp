#include "sgdflow/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace sgdflow {

namespace {

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "model.kind", "model.omega", "model.quadrature",
      "spectrum.kind", "spectrum.d", "spectrum.lambda1", "spectrum.lambda2",
      "spectrum.beta", "spectrum.s", "spectrum.lambdas",
      "rule.kind", "rule.gamma0", "rule.b", "rule.eta", "rule.alpha",
      "init.kind", "init.scale0_sq", "init.scale_star_sq", "init.delta",
      "init.v11", "init.v12", "init.v22",
      "run.t_end", "run.dt", "run.record_every", "run.seed", "run.n_runs",
      "output.path", "output.format",
      "compare.mode", "compare.reference", "compare.tol_risk", "compare.tol_gamma",
      "compare.d_list",
      "sweep.command", "sweep.parameter", "sweep.values",
  };
  return keys;
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  auto e = s.find_last_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, e - b + 1);
}

[[noreturn]] void fail(const std::string& key, const std::string& what) {
  throw std::invalid_argument("config: " + key + " " + what);
}

}  // namespace

ExperimentConfig ExperimentConfig::parse(const std::string& text) {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config: line " + std::to_string(lineno) +
                                  " is not a key = value pair");
    auto key = trim(line.substr(0, eq));
    auto value = trim(line.substr(eq + 1));
    if (known_keys().count(key) == 0)
      throw std::invalid_argument("config: unknown key '" + key + "'");
    if (cfg.entries_.count(key))
      throw std::invalid_argument("config: duplicate key '" + key + "'");
    cfg.entries_[key] = value;
  }
  return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::string ExperimentConfig::to_text() const {
  std::string out;
  for (const auto& [k, v] : entries_) out += k + " = " + v + "\n";
  return out;
}

bool ExperimentConfig::has(const std::string& key) const { return entries_.count(key) > 0; }

std::string ExperimentConfig::get(const std::string& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) fail(key, "is required but missing");
  return it->second;
}

std::string ExperimentConfig::get_or(const std::string& key, const std::string& fallback) const {
  auto it = entries_.find(key);
  return it == entries_.end() ? fallback : it->second;
}

double ExperimentConfig::get_real(const std::string& key) const {
  const std::string v = get(key);
  try {
    std::size_t pos = 0;
    double out = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("");
    return out;
  } catch (...) {
    fail(key, "must be a real number (got '" + v + "')");
  }
}

double ExperimentConfig::get_real_or(const std::string& key, double fallback) const {
  return has(key) ? get_real(key) : fallback;
}

int ExperimentConfig::get_int(const std::string& key) const {
  const std::string v = get(key);
  try {
    std::size_t pos = 0;
    int out = std::stoi(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("");
    return out;
  } catch (...) {
    fail(key, "must be an integer (got '" + v + "')");
  }
}

int ExperimentConfig::get_int_or(const std::string& key, int fallback) const {
  return has(key) ? get_int(key) : fallback;
}

std::uint64_t ExperimentConfig::get_seed_or(std::uint64_t fallback) const {
  if (!has("run.seed")) return fallback;
  return static_cast<std::uint64_t>(std::stoull(get("run.seed")));
}

void ExperimentConfig::set(const std::string& key, const std::string& value) {
  if (known_keys().count(key) == 0)
    throw std::invalid_argument("config: unknown key '" + key + "'");
  entries_[key] = value;
}

std::vector<double> parse_real_list(const std::string& text, const std::string& key) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    try {
      out.push_back(std::stod(item));
    } catch (...) {
      fail(key, "contains a non-numeric entry '" + item + "'");
    }
  }
  return out;
}

std::vector<int> parse_int_list(const std::string& text, const std::string& key) {
  std::vector<int> out;
  for (double v : parse_real_list(text, key)) out.push_back(static_cast<int>(v));
  return out;
}

RiskModel build_model(const ExperimentConfig& cfg) {
  const std::string kind = cfg.get("model.kind");
  if (kind == "least_squares") {
    const double omega = cfg.get_real_or("model.omega", 0.0);
    if (omega < 0.0) fail("model.omega", "must be >= 0");
    return RiskModel::least_squares(omega);
  }
  if (kind == "logistic") {
    const int nodes = cfg.get_int_or("model.quadrature", 64);
    if (nodes < 2) fail("model.quadrature", "must be >= 2");
    return RiskModel::logistic(nodes);
  }
  fail("model.kind", "must be least_squares or logistic (got '" + kind + "')");
}

Spectrum build_spectrum(const ExperimentConfig& cfg) {
  return build_spectrum_with_d(cfg, cfg.get_int("spectrum.d"));
}

Spectrum build_spectrum_with_d(const ExperimentConfig& cfg, int d) {
  const std::string kind = cfg.get("spectrum.kind");
  if (d < 1) fail("spectrum.d", "must be >= 1");
  try {
    if (kind == "identity") return identity_spectrum(d);
    if (kind == "two_point")
      return two_point_spectrum(cfg.get_real("spectrum.lambda1"),
                                cfg.get_real("spectrum.lambda2"), d);
    if (kind == "power_law") return power_law_spectrum(cfg.get_real("spectrum.beta"), d);
    if (kind == "cond") return cond_spectrum(cfg.get_real("spectrum.s"), d);
    if (kind == "explicit")
      return explicit_spectrum(parse_real_list(cfg.get("spectrum.lambdas"), "spectrum.lambdas"));
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument("config: spectrum invalid: " + std::string(e.what()));
  }
  fail("spectrum.kind", "must be identity, two_point, power_law, cond or explicit");
}

StepsizeRule build_rule(const ExperimentConfig& cfg) {
  const std::string kind = cfg.get("rule.kind");
  try {
    if (kind == "constant") return StepsizeRule::constant(cfg.get_real("rule.gamma0"));
    if (kind == "adagrad")
      return StepsizeRule::adagrad(cfg.get_real("rule.b"), cfg.get_real("rule.eta"));
    if (kind == "rmsprop")
      return StepsizeRule::rmsprop(cfg.get_real("rule.b"), cfg.get_real("rule.eta"),
                                   cfg.get_real("rule.alpha"));
    if (kind == "linesearch") return StepsizeRule::line_search_ls();
    if (kind == "polyak") return StepsizeRule::polyak_ls();
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument("config: rule invalid: " + std::string(e.what()));
  }
  fail("rule.kind", "must be constant, adagrad, rmsprop, linesearch or polyak");
}

InitSpec build_init(const ExperimentConfig& cfg) {
  const std::string kind = cfg.get_or("init.kind", "zero_start");
  try {
    if (kind == "zero_start")
      return InitSpec::zero_start(cfg.get_real_or("init.scale_star_sq", 1.0));
    if (kind == "gaussian_both")
      return InitSpec::gaussian_both(cfg.get_real_or("init.scale0_sq", 1.0),
                                     cfg.get_real_or("init.scale_star_sq", 1.0));
    if (kind == "powerlaw_residual")
      return InitSpec::powerlaw_residual(cfg.get_real("init.delta"));
    if (kind == "ones_star") return InitSpec::ones_star();
    if (kind == "explicit")
      return InitSpec::explicit_overlaps(cfg.get_real("init.v11"), cfg.get_real("init.v12"),
                                         cfg.get_real("init.v22"));
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument("config: init invalid: " + std::string(e.what()));
  }
  fail("init.kind",
       "must be zero_start, gaussian_both, powerlaw_residual, ones_star or explicit");
}

void validate_config(const ExperimentConfig& cfg) {
  const RiskModel model = build_model(cfg);
  build_spectrum(cfg);
  const StepsizeRule rule = build_rule(cfg);
  build_init(cfg);
  if (rule.is_idealized() && model.kind() != ModelKind::least_squares)
    fail("rule.kind", "line search / Polyak rules require model.kind = least_squares");
  if (cfg.get_real_or("run.t_end", 1.0) <= 0.0) fail("run.t_end", "must be > 0");
  if (cfg.get_real_or("run.dt", 1e-3) <= 0.0) fail("run.dt", "must be > 0");
  if (cfg.get_int_or("run.n_runs", 1) < 1) fail("run.n_runs", "must be >= 1");
}

}  // namespace sgdflow
