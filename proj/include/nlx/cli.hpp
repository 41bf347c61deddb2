#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace nlx {

// Exit codes of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;  // structured JSON error on `err`
inline constexpr int kExitUsage = 2;

// Runs one command line; args[0] is the program name. Progress lines go to
// `out`, usage text and errors to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace nlx
