#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace patchproc {

/// Exit codes of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;

/// Runs one command. `args` excludes the program name, e.g. {"r0", "--config", "t4.json"}.
/// Results go to `out` as a single JSON document that starts with the resolved configuration;
/// diagnostics go to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace patchproc
