// Experiment runner: deterministic risk/learning-rate curves, the integral
// equation oracle, the SGD simulator, comparisons, predictions, and sweeps.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sgdflow/experiment.hpp"

namespace {

struct CommonOpts {
  std::string config_path;
  std::string out_path;
  long long seed = -1;
  bool quiet = false;
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool need_out) {
  cmd->add_option("--config", opts.config_path, "experiment config file")->required();
  auto* out = cmd->add_option("--out", opts.out_path, "output path");
  if (need_out) out->required();
  cmd->add_option("--seed", opts.seed, "override run.seed");
  cmd->add_flag("--quiet", opts.quiet, "suppress progress output");
}

sgdflow::ExperimentConfig load_config(const CommonOpts& opts) {
  auto cfg = sgdflow::ExperimentConfig::load(opts.config_path);
  if (opts.seed >= 0) cfg.set("run.seed", std::to_string(opts.seed));
  if (!opts.out_path.empty()) cfg.set("output.path", opts.out_path);
  return cfg;
}

std::string out_path_of(const sgdflow::ExperimentConfig& cfg) {
  return cfg.get_or("output.path", "trajectory.csv");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"deterministic and stochastic dynamics of SGD with adaptive learning rates"};
  app.require_subcommand(1);

  CommonOpts ode_opts, volterra_opts, sgd_opts, compare_opts, asym_opts, sweep_opts;
  std::string sweep_parameter, sweep_values;

  auto* ode = app.add_subcommand("ode", "integrate the deterministic mode ODEs");
  add_common(ode, ode_opts, false);
  auto* volterra = app.add_subcommand("volterra", "solve the risk integral equation");
  add_common(volterra, volterra_opts, false);
  auto* sgd = app.add_subcommand("sgd", "simulate one-pass SGD");
  add_common(sgd, sgd_opts, false);
  auto* compare = app.add_subcommand("compare", "SGD ensemble vs deterministic reference");
  add_common(compare, compare_opts, false);
  auto* asym = app.add_subcommand("asymptotics", "print closed-form predictions");
  add_common(asym, asym_opts, false);
  auto* sweep = app.add_subcommand("sweep", "run one command across parameter values");
  add_common(sweep, sweep_opts, false);
  sweep->add_option("--param", sweep_parameter, "dotted config key to sweep")->required();
  sweep->add_option("--values", sweep_values, "comma-separated values")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (ode->parsed()) {
      auto cfg = load_config(ode_opts);
      auto traj = sgdflow::run_ode_command(cfg);
      traj.save_csv(out_path_of(cfg));
      if (!ode_opts.quiet)
        std::printf("wrote %s (%zu records)\n", out_path_of(cfg).c_str(), traj.points.size());
    } else if (volterra->parsed()) {
      auto cfg = load_config(volterra_opts);
      auto traj = sgdflow::run_volterra_command(cfg);
      traj.save_csv(out_path_of(cfg));
      if (!volterra_opts.quiet)
        std::printf("wrote %s (%zu records)\n", out_path_of(cfg).c_str(), traj.points.size());
    } else if (sgd->parsed()) {
      auto cfg = load_config(sgd_opts);
      auto result = sgdflow::run_sgd_command(cfg);
      const std::string path = out_path_of(cfg);
      result.first_run.save_csv(path);
      if (!sgd_opts.quiet) std::printf("wrote %s\n", path.c_str());
      if (result.has_ensemble) {
        std::string ens_path = path;
        auto dot = ens_path.rfind(".csv");
        if (dot != std::string::npos) ens_path = ens_path.substr(0, dot);
        ens_path += ".ensemble.csv";
        result.ensemble.save_csv(ens_path);
        if (!sgd_opts.quiet) std::printf("wrote %s\n", ens_path.c_str());
      }
    } else if (compare->parsed()) {
      auto cfg = load_config(compare_opts);
      auto result = sgdflow::run_compare_command(cfg);
      std::fputs(result.report.c_str(), stdout);
      if (!compare_opts.out_path.empty()) {
        std::FILE* f = std::fopen(compare_opts.out_path.c_str(), "wb");
        if (f) {
          std::fputs(result.report.c_str(), f);
          std::fclose(f);
        }
      }
      return result.pass ? 0 : 3;
    } else if (asym->parsed()) {
      auto cfg = load_config(asym_opts);
      std::fputs(sgdflow::run_asymptotics_command(cfg).c_str(), stdout);
    } else if (sweep->parsed()) {
      auto cfg = load_config(sweep_opts);
      std::vector<std::string> values;
      std::string item;
      std::stringstream ss(sweep_values);
      while (std::getline(ss, item, ',')) values.push_back(item);
      const std::string dir =
          sweep_opts.out_path.empty() ? std::string("sweep_out") : sweep_opts.out_path;
      if (values.empty()) {
        std::fprintf(stderr, "warning: empty sweep value list, nothing to do\n");
      } else {
        auto result = sgdflow::run_sweep_command(cfg, sweep_parameter, values, dir);
        if (!sweep_opts.quiet)
          std::printf("wrote %zu files under %s (index.csv maps value -> file)\n",
                      result.files.size(), dir.c_str());
      }
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
