#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace treerules::cli {

/// Process exit codes.
enum ExitCode : int {
  kOk = 0,
  kRuntimeError = 1,
  kConfigError = 2,
  kEquivalenceFailure = 3,
};

/// Environment variable naming the directory searched for relative
/// --config paths that do not exist in the working directory.
inline constexpr const char* kConfigDirEnv = "TREERULES_CONFIG_DIR";

/// Runs the command line `args` (args[0] is the program name) and returns the
/// exit code. Normal output goes to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace treerules::cli
