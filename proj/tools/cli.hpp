#pragma once

#include <ostream>

namespace pointscatter::cli {

/// Exit codes of the command-line tool.
enum ExitCode : int { kOk = 0, kInternalError = 1, kConfigError = 2, kNumericalError = 3 };

/// Runs `pointscatter <subcommand> ...`. Results go to the configured output
/// path or to `out`; diagnostics go to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Thread budget: hardware concurrency, capped by POINTSCATTER_THREADS.
unsigned thread_budget();

}  // namespace pointscatter::cli
