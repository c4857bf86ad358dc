#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace relaysec::cli {

enum ExitCode : int {
  kOk = 0,
  kInvalidInput = 2,
  kInfeasible = 3,
  kNumericalFailure = 4,
};

/// Runs one command line (without the program name). CSV goes to `out`
/// unless --out names a file; diagnostics and summaries go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

std::vector<std::string> preset_names();

}  // namespace relaysec::cli
