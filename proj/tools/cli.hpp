#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace rpf::cli {

/// Exit codes: 0 success, 2 usage or schema error, 3 numerical failure.
inline constexpr int kExitOk = 0;
inline constexpr int kExitSchema = 2;
inline constexpr int kExitNumerical = 3;

/// Runs the tool on args (args[0] is the program name). Results go to `out`
/// unless --out names a file; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace rpf::cli
