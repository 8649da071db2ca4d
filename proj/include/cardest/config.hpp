#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "cardest/analysis.hpp"

namespace cardest {

// Flat key=value run configuration. Defaults are the reference experiment:
// n=300 of n_max=350 in the unit square, R=0.1, q=0.1.
struct RunConfig {
  std::uint32_t n = 300;
  std::uint32_t n_max = 350;
  double length = 1.0;
  double width = 1.0;
  double radius = 0.1;
  double f_initial = 0.5;
  double erasure = 0.1;
  int rounds = 6;
  int queried = 35;
  int trials = 500;
  std::uint64_t seed = 1;
  DistanceMode distance_mode = DistanceMode::planar;
  bool topology = false;
  int coord_bits = 32;
  double coverage_threshold = 0.95;
  CoverageMetric coverage_metric = CoverageMetric::count;
  int round_cap = 50;

  TrialConfig to_trial_config(unsigned jobs = 1) const;
  // Throws InvalidConfig.
  void validate() const;
};

const std::vector<std::string>& config_keys();

// Throws InvalidConfig on an unknown key or malformed value.
void apply_setting(RunConfig& cfg, std::string_view key, std::string_view value);

// Lines of `key = value`; '#' starts a comment; blank lines ignored.
void apply_config_text(RunConfig& cfg, std::string_view text);

// Every key with its resolved value, one per line, in config_keys() order.
std::string to_config_text(const RunConfig& cfg);

}  // namespace cardest
