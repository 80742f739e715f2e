#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace balrisk {

// Exit codes of the command-line front end.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitNumeric = 3;

// args excludes the program name. Results go to `out` unless --out is given;
// diagnostics go to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace balrisk
