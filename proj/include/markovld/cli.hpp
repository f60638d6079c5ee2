#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace markovld::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitRuntime = 3;

/// Runs the command line `args` (args[0] is the program name). Data goes to
/// `out` (or the --out path), diagnostics to `err` as one JSON line.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace markovld::cli
