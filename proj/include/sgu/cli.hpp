#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace sgu::cli {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kConfigError = 2,
  kIoError = 3,
  kValidationError = 4,
  kInfeasibleK = 5,
};

/// Runs one command line (without the program name). Diagnostics go to `err`,
/// summaries to `out`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sgu::cli
