#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace spiro::cli {

// Exit codes. Every failure also writes one line starting with
// "spiro: error: " to the error stream.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;  // runtime, IO or file-format error
inline constexpr int kExitUsage = 2;    // bad flags or flag values

// Runs one subcommand. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace spiro::cli
