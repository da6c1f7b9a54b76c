#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "sgdflow/detflow.hpp"
#include "sgdflow/riskmodel.hpp"
#include "sgdflow/spectrum.hpp"
#include "sgdflow/stepsize.hpp"

namespace sgdflow {

// Flat dotted-key configuration ("section.key = value" lines, '#' comments).
// Parsing validates keys against the schema; building validates values
// against the module preconditions with messages naming the offending key.
class ExperimentConfig {
 public:
  static ExperimentConfig parse(const std::string& text);
  static ExperimentConfig load(const std::string& path);

  // Canonical text form; parse(to_text()) reproduces the config exactly.
  std::string to_text() const;

  bool has(const std::string& key) const;
  std::string get(const std::string& key) const;
  std::string get_or(const std::string& key, const std::string& fallback) const;
  double get_real(const std::string& key) const;
  double get_real_or(const std::string& key, double fallback) const;
  int get_int(const std::string& key) const;
  int get_int_or(const std::string& key, int fallback) const;
  std::uint64_t get_seed_or(std::uint64_t fallback) const;

  void set(const std::string& key, const std::string& value);

  const std::map<std::string, std::string>& entries() const { return entries_; }

 private:
  std::map<std::string, std::string> entries_;
};

RiskModel build_model(const ExperimentConfig& cfg);
Spectrum build_spectrum(const ExperimentConfig& cfg);
Spectrum build_spectrum_with_d(const ExperimentConfig& cfg, int d);
StepsizeRule build_rule(const ExperimentConfig& cfg);
InitSpec build_init(const ExperimentConfig& cfg);

// Cross-module validation (e.g. idealized rules require least squares).
void validate_config(const ExperimentConfig& cfg);

std::vector<double> parse_real_list(const std::string& text, const std::string& key);
std::vector<int> parse_int_list(const std::string& text, const std::string& key);

}  // namespace sgdflow
