#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace minispace::gateway {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;  // the operation failed; details on stderr
inline constexpr int kExitUsage = 2;    // bad flags or arguments

/// The `space` command line. args[0] is the program name. Failures print one
/// JSON object per line on `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace minispace::gateway
