#pragma once

#include <map>
#include <string>
#include <vector>

namespace sgdflow {

// One recorded instant of a risk/learning-rate curve.
struct TrajectoryPoint {
  double t = 0.0;
  double risk = 0.0;
  double gamma = 0.0;
  double d2 = 0.0;
  double b11 = 0.0;
  double b12 = 0.0;
  double b22 = 0.0;
};

// Time-indexed curve from either the deterministic solvers or the SGD
// simulator, plus free-form metadata emitted as "# key=value" header lines.
struct Trajectory {
  std::vector<TrajectoryPoint> points;
  std::map<std::string, std::string> metadata;

  const TrajectoryPoint& back() const { return points.back(); }

  // Linear interpolation of a field onto an arbitrary time (clamped to the
  // recorded range). field: 0 = risk, 1 = gamma, 2 = d2.
  double interpolate(double t, int field) const;

  std::string to_csv() const;
  void save_csv(const std::string& path) const;
  static Trajectory load_csv(const std::string& path);
};

// Ensemble aggregate on a shared time grid: per-time medians of all fields
// plus 5%/95% quantile bands for risk and learning rate.
struct EnsembleSummary {
  Trajectory median;  // base columns hold per-time medians
  std::vector<double> risk_q05, risk_q95;
  std::vector<double> gamma_q05, gamma_q95;

  std::string to_csv() const;
  void save_csv(const std::string& path) const;
};

}  // namespace sgdflow
