#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace gwi::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

/// Entry point of gw-estim. Output goes to `out` unless a command is given
/// --output; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace gwi::cli
