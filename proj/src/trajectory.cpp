#include "sgdflow/trajectory.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace sgdflow {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double field_of(const TrajectoryPoint& p, int field) {
  switch (field) {
    case 0: return p.risk;
    case 1: return p.gamma;
    case 2: return p.d2;
    default: throw std::invalid_argument("trajectory: unknown field index");
  }
}

}  // namespace

double Trajectory::interpolate(double t, int field) const {
  if (points.empty()) throw std::runtime_error("trajectory: empty");
  if (t <= points.front().t) return field_of(points.front(), field);
  if (t >= points.back().t) return field_of(points.back(), field);
  std::size_t lo = 0, hi = points.size() - 1;
  while (hi - lo > 1) {
    std::size_t mid = (lo + hi) / 2;
    if (points[mid].t <= t)
      lo = mid;
    else
      hi = mid;
  }
  const double t0 = points[lo].t, t1 = points[hi].t;
  const double w = (t1 > t0) ? (t - t0) / (t1 - t0) : 0.0;
  return (1.0 - w) * field_of(points[lo], field) + w * field_of(points[hi], field);
}

std::string Trajectory::to_csv() const {
  std::string out;
  for (const auto& [k, v] : metadata) out += "# " + k + "=" + v + "\n";
  out += "t,risk,gamma,d2,b11,b12,b22\n";
  for (const auto& p : points) {
    out += fmt(p.t) + "," + fmt(p.risk) + "," + fmt(p.gamma) + "," + fmt(p.d2) + "," +
           fmt(p.b11) + "," + fmt(p.b12) + "," + fmt(p.b22) + "\n";
  }
  return out;
}

void Trajectory::save_csv(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("trajectory: cannot open " + path);
  out << to_csv();
}

Trajectory Trajectory::load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("trajectory: cannot open " + path);
  Trajectory traj;
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      auto body = line.substr(1);
      auto eq = body.find('=');
      if (eq != std::string::npos) {
        auto key = body.substr(0, eq);
        while (!key.empty() && key.front() == ' ') key.erase(key.begin());
        traj.metadata[key] = body.substr(eq + 1);
      }
      continue;
    }
    if (!header_seen) {
      header_seen = true;  // column header
      continue;
    }
    std::istringstream row(line);
    TrajectoryPoint p;
    char comma;
    row >> p.t >> comma >> p.risk >> comma >> p.gamma >> comma >> p.d2 >> comma >> p.b11 >>
        comma >> p.b12 >> comma >> p.b22;
    if (!row) throw std::runtime_error("trajectory: malformed row: " + line);
    traj.points.push_back(p);
  }
  return traj;
}

std::string EnsembleSummary::to_csv() const {
  std::string out;
  for (const auto& [k, v] : median.metadata) out += "# " + k + "=" + v + "\n";
  out += "t,risk,gamma,d2,b11,b12,b22,risk_q05,risk_q95,gamma_q05,gamma_q95\n";
  for (std::size_t i = 0; i < median.points.size(); ++i) {
    const auto& p = median.points[i];
    out += fmt(p.t) + "," + fmt(p.risk) + "," + fmt(p.gamma) + "," + fmt(p.d2) + "," +
           fmt(p.b11) + "," + fmt(p.b12) + "," + fmt(p.b22) + "," + fmt(risk_q05[i]) + "," +
           fmt(risk_q95[i]) + "," + fmt(gamma_q05[i]) + "," + fmt(gamma_q95[i]) + "\n";
  }
  return out;
}

void EnsembleSummary::save_csv(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("trajectory: cannot open " + path);
  out << to_csv();
}

}  // namespace sgdflow
