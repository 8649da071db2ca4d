#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cardest::cli {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int {
  kOk = 0,
  kCheckFailed = 1,
  kInvalidConfig = 2,
  kIoError = 3,
};

// Entry point behind the `cardest` binary. args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cardest::cli
