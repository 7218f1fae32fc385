#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace boxlabel::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitInternal = 4;

/// Runs the command line `args` (without the program name). Reports go to
/// `out`; failures are written to `err` as `ERROR:<exit code>:<message>`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace boxlabel::cli
