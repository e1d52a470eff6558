#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace thermodiag::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kInputError = 2,      // unreadable/malformed files, invalid model or options
  kNumericalError = 3,  // singular systems, non-finite states
  kVerificationFailed = 4,
};

/// Entry point shared by the executable and the tests. args[0] is the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace thermodiag::cli
