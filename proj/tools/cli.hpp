#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace pipekrylov::cli {

/// Exit statuses of the command-line front end.
inline constexpr int kOk = 0;
inline constexpr int kUsageError = 1;
inline constexpr int kSolverFailure = 2;

/// Runs one invocation. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pipekrylov::cli
