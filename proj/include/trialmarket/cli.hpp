#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace trialmarket::cli {

/// Exit statuses of the command-line tool.
enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kInvalidConfig = 2,
  kDegenerate = 3,
  kUnsupportedSolver = 4,
  kOversize = 5,
};

/// Runs the tool on `args` (without the program name). Results go to `out`
/// or to files; diagnostics go to `err`.
int run(std::vector<std::string> args, std::ostream& out, std::ostream& err);

}  // namespace trialmarket::cli
