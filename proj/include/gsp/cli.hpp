#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace gsp {

// Exit codes of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitInternal = 1,
  kExitUsage = 2,
  kExitInput = 3,
  kExitGuard = 4,
  kExitDoesNotHold = 5,  // `check` ran fine but the property fails
};

// Runs the tool on argv (args[0] is the program name). Reports go to `out`,
// diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gsp
