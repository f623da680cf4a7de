#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace smpc::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitSolver = 3;

/**
 * Entry point of the `smpc` tool. Subcommands: simulate, montecarlo,
 * tightening-compare, gains. Returns 0 on success, 2 on configuration or
 * argument errors, 3 on synthesis or solver failure.
 */
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Convenience overload for tests; args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace smpc::cli
