#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace pspin::cli {

inline constexpr const char* kVersion = "0.1.0";

/// Worker-count default, read when a command does not pass --threads.
inline constexpr const char* kThreadsEnv = "PSPIN_THREADS";

enum ExitCode : int { ok = 0, usage = 1, validation = 2, resource = 3 };

/// Runs one command line. Reports go to `out`, diagnostics and timings to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace pspin::cli
