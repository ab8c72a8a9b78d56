#pragma once

#include <ostream>

namespace reofilm::cli {

/// Exit codes shared by all subcommands.
enum ExitCode : int {
  kOk = 0,
  kConfigError = 1,
  kRuntimeError = 2,
  kIdentityFailure = 3,
};

/// Parses `argv` and runs one subcommand, writing results to `out` and
/// messages to `err`.
int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

/// Sets the log level from REOFILM_LOG (error, info or debug).
void configure_logging();

}  // namespace reofilm::cli
