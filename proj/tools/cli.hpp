#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace netcvx::cli {

/// Exit codes: 0 converged, 2 iteration limit reached, 1 any error.
inline constexpr int kExitConverged = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitMaxIters = 2;

/// Runs the command line `args` (without the program name).
int run(std::vector<std::string> args, std::ostream& out, std::ostream& err);

}  // namespace netcvx::cli
