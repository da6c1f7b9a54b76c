#include "sgdflow/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "sgdflow/asymptotics.hpp"
#include "sgdflow/sgdsim.hpp"

namespace sgdflow {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void merge_config_metadata(Trajectory& traj, const ExperimentConfig& cfg) {
  for (const auto& [k, v] : cfg.entries()) traj.metadata["cfg." + k] = v;
}

}  // namespace

double sup_gap(const Trajectory& a, const Trajectory& b, int field) {
  double gap = 0.0;
  for (const auto& p : a.points) {
    const double ref = b.interpolate(p.t, field);
    const double val = (field == 0) ? p.risk : (field == 1 ? p.gamma : p.d2);
    gap = std::max(gap, std::abs(val - ref));
  }
  return gap;
}

Trajectory run_ode_command(const ExperimentConfig& cfg) {
  validate_config(cfg);
  const auto model = build_model(cfg);
  const auto spectrum = build_spectrum(cfg);
  const auto rule = build_rule(cfg);
  const auto init = build_init(cfg);
  const double t_end = cfg.get_real("run.t_end");
  const double dt = cfg.get_real_or("run.dt", 1e-3);
  const double rec = cfg.get_real_or("run.record_every", t_end / 1000.0);
  auto traj = solve_detflow(model, spectrum, rule, init, t_end, dt, rec);
  merge_config_metadata(traj, cfg);
  return traj;
}

Trajectory run_volterra_command(const ExperimentConfig& cfg) {
  validate_config(cfg);
  const auto model = build_model(cfg);
  if (model.kind() != ModelKind::least_squares)
    throw std::invalid_argument("config: model.kind volterra solver is least-squares only");
  const auto spectrum = build_spectrum(cfg);
  const auto rule = build_rule(cfg);
  const auto init = build_init(cfg);
  const double t_end = cfg.get_real("run.t_end");
  const double dt = cfg.get_real_or("run.dt", 1e-3);
  const double rec = cfg.get_real_or("run.record_every", t_end / 1000.0);
  KernelPair kp(spectrum, init, model.omega());
  auto traj = solve_volterra(kp, rule, t_end, dt, rec);
  merge_config_metadata(traj, cfg);
  return traj;
}

SgdCommandResult run_sgd_command(const ExperimentConfig& cfg) {
  validate_config(cfg);
  const auto model = build_model(cfg);
  const auto spectrum = build_spectrum(cfg);
  const auto rule = build_rule(cfg);
  const auto init = build_init(cfg);
  const double t_end = cfg.get_real("run.t_end");
  const double rec = cfg.get_real_or("run.record_every", t_end / 1000.0);
  const std::uint64_t seed = cfg.get_seed_or(1);
  const int n_runs = cfg.get_int_or("run.n_runs", 1);

  SgdCommandResult result;
  result.first_run = run_sgd(model, spectrum, rule, init, t_end, seed, rec);
  merge_config_metadata(result.first_run, cfg);
  if (n_runs > 1) {
    result.ensemble = run_ensemble(model, spectrum, rule, init, t_end, seed, rec, n_runs);
    merge_config_metadata(result.ensemble.median, cfg);
    result.has_ensemble = true;
  }
  return result;
}

CompareResult run_compare_command(const ExperimentConfig& cfg) {
  validate_config(cfg);
  const std::string mode = cfg.get_or("compare.mode", "sgd");
  const double tol_risk = cfg.get_real_or("compare.tol_risk", 0.05);
  const double tol_gamma = cfg.get_real_or("compare.tol_gamma", 0.05);
  CompareResult res;
  std::string report;

  if (mode == "oracles") {
    auto ode = run_ode_command(cfg);
    auto volt = run_volterra_command(cfg);
    CompareRow row;
    row.d = cfg.get_int("spectrum.d");
    row.gap_risk = sup_gap(ode, volt, 0);
    row.gap_gamma = sup_gap(ode, volt, 1);
    res.rows.push_back(row);
    res.pass = row.gap_risk <= tol_risk && row.gap_gamma <= tol_gamma;
    report += "comparison: ode vs volterra\n";
    report += "d=" + std::to_string(row.d) + " sup_gap_risk=" + fmt(row.gap_risk) +
              " sup_gap_gamma=" + fmt(row.gap_gamma) + "\n";
    report += std::string(res.pass ? "PASS" : "FAIL") + " (tol_risk=" + fmt(tol_risk) +
              ", tol_gamma=" + fmt(tol_gamma) + ")\n";
    res.report = report;
    return res;
  }
  if (mode != "sgd") throw std::invalid_argument("config: compare.mode must be sgd or oracles");

  const std::string reference = cfg.get_or("compare.reference", "ode");
  if (reference != "ode" && reference != "volterra")
    throw std::invalid_argument("config: compare.reference must be ode or volterra");

  std::vector<int> d_list;
  if (cfg.has("compare.d_list"))
    d_list = parse_int_list(cfg.get("compare.d_list"), "compare.d_list");
  else
    d_list = {cfg.get_int("spectrum.d")};

  const auto model = build_model(cfg);
  const auto rule = build_rule(cfg);
  const auto init = build_init(cfg);
  const double t_end = cfg.get_real("run.t_end");
  const double dt = cfg.get_real_or("run.dt", 1e-3);
  const double rec = cfg.get_real_or("run.record_every", t_end / 1000.0);
  const std::uint64_t seed = cfg.get_seed_or(1);
  const int n_runs = cfg.get_int_or("run.n_runs", 1);

  report += "comparison: sgd median (n_runs=" + std::to_string(n_runs) + ") vs " + reference +
            "\n";
  for (int d : d_list) {
    const auto spectrum = build_spectrum_with_d(cfg, d);
    Trajectory ref;
    if (reference == "ode") {
      ref = solve_detflow(model, spectrum, rule, init, t_end, dt, rec);
    } else {
      KernelPair kp(spectrum, init, model.omega());
      ref = solve_volterra(kp, rule, t_end, dt, rec);
    }
    auto ens = run_ensemble(model, spectrum, rule, init, t_end, seed, rec, n_runs);
    CompareRow row;
    row.d = d;
    row.gap_risk = sup_gap(ens.median, ref, 0);
    row.gap_gamma = sup_gap(ens.median, ref, 1);
    res.rows.push_back(row);
    report += "d=" + std::to_string(d) + " sup_gap_risk=" + fmt(row.gap_risk) +
              " sup_gap_gamma=" + fmt(row.gap_gamma) + "\n";
  }
  bool monotone = true;
  for (std::size_t i = 1; i < res.rows.size(); ++i)
    if (res.rows[i].gap_risk > res.rows[i - 1].gap_risk ||
        res.rows[i].gap_gamma > res.rows[i - 1].gap_gamma)
      monotone = false;
  if (res.rows.size() > 1)
    report += std::string("gap decreasing in d: ") + (monotone ? "yes" : "no") + "\n";
  const auto& last = res.rows.back();
  res.pass = last.gap_risk <= tol_risk && last.gap_gamma <= tol_gamma;
  report += std::string(res.pass ? "PASS" : "FAIL") + " (tol_risk=" + fmt(tol_risk) +
            ", tol_gamma=" + fmt(tol_gamma) + " at d=" + std::to_string(last.d) + ")\n";
  res.report = report;
  return res;
}

std::string run_asymptotics_command(const ExperimentConfig& cfg) {
  std::string out;
  const auto spectrum = build_spectrum(cfg);
  out += "avg_eig=" + fmt(spectrum.avg_eig()) + "\n";
  out += "avg_eig2=" + fmt(spectrum.avg_eig2()) + "\n";
  out += "lambda_min=" + fmt(spectrum.lambda_min()) + "\n";
  out += "lambda_max=" + fmt(spectrum.lambda_max()) + "\n";
  out += "polyak_noiseless=" + fmt(1.0 / spectrum.avg_eig()) + "\n";
  out += "line_search_floor=" + fmt(spectrum.lambda_min() / spectrum.avg_eig2()) + "\n";

  if (cfg.get_or("spectrum.kind", "") == "two_point") {
    const double limit =
        line_search_limit(cfg.get_real("spectrum.lambda1"), cfg.get_real("spectrum.lambda2"));
    out += "line_search_limit=" + fmt(limit) + "\n";
  }
  if (cfg.get_or("rule.kind", "") == "adagrad") {
    const double b = cfg.get_real("rule.b");
    const double eta = cfg.get_real("rule.eta");
    const auto init = build_init(cfg);
    const auto modes = init_modes(spectrum, init);
    double d2_0 = 0.0;
    for (const auto& m : modes) d2_0 += m.weight * m.d2();
    const auto bracket =
        adagrad_limit_bracket(b, eta, spectrum.avg_eig(), d2_0, eta / b);
    if (bracket.available) {
      out += "adagrad_gamma_inf_lower=" + fmt(bracket.lower) + "\n";
      out += "adagrad_gamma_inf_central=" + fmt(bracket.central) + "\n";
      out += "adagrad_gamma_inf_upper=" + fmt(bracket.upper) + "\n";
    } else {
      out += "adagrad_gamma_inf_bracket=unavailable (" + bracket.reason + ")\n";
    }
    const double omega = cfg.get_real_or("model.omega", 0.0);
    if (omega > 0.0 && cfg.has("run.t_end")) {
      const double t = cfg.get_real("run.t_end");
      out += "noisy_adagrad_asymptote_at_t_end=" +
             fmt(noisy_adagrad_asymptote(b, eta, omega, spectrum.avg_eig(), t)) + "\n";
    }
  }
  if (cfg.get_or("spectrum.kind", "") == "power_law" &&
      cfg.get_or("init.kind", "") == "powerlaw_residual") {
    const double beta = cfg.get_real("spectrum.beta");
    const double delta = cfg.get_real("init.delta");
    const auto rates = power_law_rates(beta, delta);
    const char* regime = rates.regime == PowerLawRegime::fast
                             ? "fast"
                             : (rates.regime == PowerLawRegime::critical ? "critical" : "slow");
    out += std::string("power_law_regime=") + regime + "\n";
    out += "risk_exponent=" + fmt(rates.risk_exponent) + "\n";
    out += "gamma_exponent=" + fmt(rates.gamma_exponent) + "\n";
    out += "risk_descriptor=" + rates.risk_descriptor + "\n";
    out += "gamma_descriptor=" + rates.gamma_descriptor + "\n";
    const auto kappa = kappa_exponents(beta, delta);
    out += "kappa1=" + fmt(kappa.kappa1) + "\n";
    out += "kappa2=" + fmt(kappa.kappa2) + "\n";
  }
  return out;
}

SweepResult run_sweep_command(const ExperimentConfig& cfg, const std::string& parameter,
                              const std::vector<std::string>& values,
                              const std::string& out_dir) {
  SweepResult res;
  res.index_csv = "value,file\n";
  if (values.empty()) return res;

  const std::string command = cfg.get_or("sweep.command", "ode");
  std::filesystem::create_directories(out_dir);
  int idx = 0;
  for (const auto& value : values) {
    ExperimentConfig sub = cfg;
    sub.set(parameter, value);
    validate_config(sub);
    Trajectory traj;
    if (command == "ode") {
      traj = run_ode_command(sub);
    } else if (command == "volterra") {
      traj = run_volterra_command(sub);
    } else if (command == "sgd") {
      traj = run_sgd_command(sub).first_run;
    } else {
      throw std::invalid_argument("config: sweep.command must be ode, volterra or sgd");
    }
    std::string name = parameter + "_" + value + ".csv";
    std::replace(name.begin(), name.end(), '/', '_');
    const std::string path = out_dir + "/" + name;
    traj.save_csv(path);
    res.files.push_back(path);
    res.index_csv += value + "," + name + "\n";
    ++idx;
  }
  std::ofstream index(out_dir + "/index.csv", std::ios::binary);
  index << res.index_csv;
  return res;
}

}  // namespace sgdflow
