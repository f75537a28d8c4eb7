#pragma once

#include <exception>
#include <iosfwd>

namespace drd::cli {

enum ExitCode : int { kOk = 0, kFailure = 1, kUsage = 2, kIo = 3, kNumeric = 4, kCompatibility = 5 };

/// Runs `drd <subcommand> ...`. Diagnostics go to `err` as one line.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Exit code for a library exception.
int exit_code_for(const std::exception& e);

}  // namespace drd::cli
