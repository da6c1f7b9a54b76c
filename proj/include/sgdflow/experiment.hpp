#pragma once

#include <string>

#include "sgdflow/config.hpp"
#include "sgdflow/trajectory.hpp"
#include "sgdflow/volterra.hpp"

namespace sgdflow {

// Command implementations behind the CLI, reusable from tests.

Trajectory run_ode_command(const ExperimentConfig& cfg);
Trajectory run_volterra_command(const ExperimentConfig& cfg);

struct SgdCommandResult {
  Trajectory first_run;
  EnsembleSummary ensemble;  // populated when run.n_runs > 1
  bool has_ensemble = false;
};

SgdCommandResult run_sgd_command(const ExperimentConfig& cfg);

struct CompareRow {
  int d = 0;
  double gap_risk = 0.0;
  double gap_gamma = 0.0;
};

struct CompareResult {
  std::vector<CompareRow> rows;
  bool pass = false;
  std::string report;
};

// compare.mode = sgd (default): per-time median of an SGD ensemble against
// the deterministic reference (compare.reference = ode | volterra), sup-norm
// gaps for risk and learning rate, one row per dimension in compare.d_list
// (falling back to spectrum.d). compare.mode = oracles: the two
// deterministic solvers against each other.
CompareResult run_compare_command(const ExperimentConfig& cfg);

// Predictions printable as key=value lines.
std::string run_asymptotics_command(const ExperimentConfig& cfg);

struct SweepResult {
  std::vector<std::string> files;
  std::string index_csv;
};

// One run of sweep.command (ode | volterra | sgd) per value, overriding the
// swept key; writes <out_dir>/<n>.csv plus an index mapping value -> file.
SweepResult run_sweep_command(const ExperimentConfig& cfg, const std::string& parameter,
                              const std::vector<std::string>& values,
                              const std::string& out_dir);

// Sup-norm gap between two curves, the second interpolated onto the grid of
// the first. field: 0 = risk, 1 = gamma.
double sup_gap(const Trajectory& a, const Trajectory& b, int field);

}  // namespace sgdflow
