#pragma once

#include <iosfwd>

namespace jumpdiff {

inline constexpr const char* kToolName = "jumpdiff";
inline constexpr const char* kToolVersion = "0.1.0";

// Entry point of the command-line tool, callable in-process. Returns the
// exit code: 0 success, 1 internal error, 2 input or configuration error.
// Errors are written to `err` as {"kind", "message", "context"} JSON.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace jumpdiff
