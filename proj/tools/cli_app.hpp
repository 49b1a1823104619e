#ifndef PERSIST_TOOLS_CLI_APP_HPP
#define PERSIST_TOOLS_CLI_APP_HPP

#include <ostream>
#include <string>
#include <vector>

namespace persist::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitInfeasible = 3;
inline constexpr int kExitCheckFailed = 4;

/// Runs the command line `persist <args...>` writing results to out and
/// diagnostics to err.  Returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace persist::cli

#endif  // PERSIST_TOOLS_CLI_APP_HPP
