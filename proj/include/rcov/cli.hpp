#pragma once

// Command-line frontend. `run` is callable in-process so tests can drive it
// without spawning a shell.

#include <exception>
#include <ostream>
#include <string>
#include <vector>

namespace rcov::cli {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,        // bad flags, invalid configuration or confidence level
  kDataError = 2,    // unreadable or malformed input, dimension mismatches
  kNumerical = 3,    // FactorizationFailure
  kSampleTooSmall = 4,
};

/// `args` excludes the program name: {"estimate", "--input", "x.csv", ...}.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Maps a library exception to the documented exit code.
int exit_code_for(const std::exception& e);

int main_entry(int argc, char** argv);

}  // namespace rcov::cli
