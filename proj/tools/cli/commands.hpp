#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace poissonlab::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitPredicateFailed = 2;
inline constexpr int kExitUsage = 64;
inline constexpr int kExitInternal = 70;

/// Runs one invocation. args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace poissonlab::cli
