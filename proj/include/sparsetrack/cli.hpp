#pragma once

#include <iosfwd>

namespace sparsetrack {

/// Exit codes returned by run_cli.
enum ExitCode : int { kExitOk = 0, kExitUsage = 2, kExitData = 3, kExitNumeric = 4 };

/// Entry point for the `sparsetrack` tool. Never throws; errors are written to
/// `err` and mapped to an exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace sparsetrack
