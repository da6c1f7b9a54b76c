#include "sgdflow/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <stdexcept>

namespace sgdflow {

namespace {

constexpr double kWeightTol = 1e-12;

}  // namespace

Spectrum::Spectrum(std::vector<SpectrumGroup> groups, int d)
    : groups_(std::move(groups)), d_(d) {
  if (d_ < 1) throw std::invalid_argument("spectrum: d must be >= 1");
  if (groups_.empty()) throw std::invalid_argument("spectrum: no eigenvalue groups");
  double wsum = 0.0;
  for (const auto& g : groups_) {
    if (!(g.lambda >= 0.0))
      throw std::invalid_argument("spectrum: negative eigenvalue");
    if (!(g.weight > 0.0) || g.weight > 1.0 + kWeightTol)
      throw std::invalid_argument("spectrum: weight outside (0,1]");
    wsum += g.weight;
    avg_eig_ += g.weight * g.lambda;
    avg_eig2_ += g.weight * g.lambda * g.lambda;
  }
  if (std::abs(wsum - 1.0) > kWeightTol)
    throw std::invalid_argument("spectrum: weights do not sum to 1");
}

double Spectrum::lambda_min() const {
  double m = groups_.front().lambda;
  for (const auto& g : groups_) m = std::min(m, g.lambda);
  return m;
}

double Spectrum::lambda_max() const {
  double m = groups_.front().lambda;
  for (const auto& g : groups_) m = std::max(m, g.lambda);
  return m;
}

std::vector<double> Spectrum::expand() const {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(d_));
  for (const auto& g : groups_) {
    double md = g.weight * d_;
    auto m = static_cast<long>(std::llround(md));
    if (std::abs(md - static_cast<double>(m)) > 1e-9 || m < 1)
      throw std::runtime_error("spectrum: group multiplicity is not integral");
    out.insert(out.end(), static_cast<std::size_t>(m), g.lambda);
  }
  if (out.size() != static_cast<std::size_t>(d_))
    throw std::runtime_error("spectrum: multiplicities do not sum to d");
  return out;
}

std::string Spectrum::to_text() const {
  std::string out = "# d=" + std::to_string(d_) + "\n";
  char buf[80];
  for (const auto& g : groups_) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g\n", g.lambda, g.weight);
    out += buf;
  }
  return out;
}

Spectrum Spectrum::from_text(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int d = -1;
  std::vector<SpectrumGroup> groups;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      auto pos = line.find("d=");
      if (pos != std::string::npos) d = std::stoi(line.substr(pos + 2));
      continue;
    }
    auto comma = line.find(',');
    if (comma == std::string::npos)
      throw std::invalid_argument("spectrum: malformed line: " + line);
    groups.push_back({std::stod(line.substr(0, comma)), std::stod(line.substr(comma + 1))});
  }
  if (d < 1) throw std::invalid_argument("spectrum: missing '# d=' header");
  return Spectrum(std::move(groups), d);
}

Spectrum two_point_spectrum(double lambda1, double lambda2, int d) {
  if (!(lambda2 > 0.0) || !(lambda1 > lambda2))
    throw std::invalid_argument("two_point_spectrum: requires lambda1 > lambda2 > 0");
  if (d < 2 || d % 2 != 0)
    throw std::invalid_argument("two_point_spectrum: d must be even and >= 2");
  return Spectrum({{lambda1, 0.5}, {lambda2, 0.5}}, d);
}

Spectrum power_law_spectrum(double beta, int d) {
  if (!(beta >= 0.0) || !(beta < 1.0))
    throw std::invalid_argument("power_law_spectrum: requires 0 <= beta < 1");
  if (d < 1) throw std::invalid_argument("power_law_spectrum: d must be >= 1");
  const double expo = 1.0 / (1.0 - beta);
  std::vector<SpectrumGroup> groups;
  groups.reserve(static_cast<std::size_t>(d));
  const double w = 1.0 / d;
  for (int i = 1; i <= d; ++i) {
    double u = (i - 0.5) / d;
    groups.push_back({std::pow(u, expo), w});
  }
  return Spectrum(std::move(groups), d);
}

Spectrum cond_spectrum(double s, int d) {
  if (!(s > 2.0)) throw std::invalid_argument("cond_spectrum: requires s > 2");
  if (d < 1) throw std::invalid_argument("cond_spectrum: d must be >= 1");
  double sum = 0.0;
  for (int j = 1; j <= d; ++j) sum += std::pow(static_cast<double>(j) / (d + 1), -2.0 / s);
  const double pref = std::sqrt(static_cast<double>(d) / sum);
  std::vector<SpectrumGroup> groups;
  groups.reserve(static_cast<std::size_t>(d));
  const double w = 1.0 / d;
  for (int i = 1; i <= d; ++i)
    groups.push_back({pref * std::pow(static_cast<double>(i) / (d + 1), -1.0 / s), w});
  return Spectrum(std::move(groups), d);
}

Spectrum identity_spectrum(int d) {
  if (d < 1) throw std::invalid_argument("identity_spectrum: d must be >= 1");
  return Spectrum({{1.0, 1.0}}, d);
}

Spectrum explicit_spectrum(const std::vector<double>& lambdas) {
  if (lambdas.empty()) throw std::invalid_argument("explicit_spectrum: empty eigenvalue list");
  std::map<double, int> counts;
  for (double v : lambdas) {
    if (!(v >= 0.0)) throw std::invalid_argument("explicit_spectrum: negative eigenvalue");
    ++counts[v];
  }
  const int d = static_cast<int>(lambdas.size());
  std::vector<SpectrumGroup> groups;
  groups.reserve(counts.size());
  for (const auto& [lambda, count] : counts)
    groups.push_back({lambda, static_cast<double>(count) / d});
  return Spectrum(std::move(groups), d);
}

}  // namespace sgdflow
