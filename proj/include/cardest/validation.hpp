#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace cardest {

struct ValidationOptions {
  std::uint64_t seed = 20240601;
  // Multiplies the modelled alpha1 in the t=1 check; 1 is the real formula.
  // Anything else is a negative control that should make the check fail.
  double alpha1_scale = 1.0;
  // Subset of check names to run; empty runs all.
  std::vector<std::string> only;
  unsigned jobs = 1;
};

struct CheckResult {
  std::string name;
  double measured = 0.0;
  double predicted = 0.0;
  std::string tolerance;
  bool passed = false;
};

std::vector<std::string> validation_check_names();

// Analytic-versus-empirical checks. Throws InvalidArgument on unknown names.
std::vector<CheckResult> run_validation(const ValidationOptions& opts);

}  // namespace cardest
