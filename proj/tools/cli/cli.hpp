#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace phishtriage::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Runs one command line (without the program name). Regular output goes to
/// `out`; diagnostics and structured error lines go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace phishtriage::cli
