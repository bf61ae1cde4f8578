#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace itrm::cli {

// Exit codes: 0 success/Halted/PASS, 1 diagnostics or FAIL, 2 usage or
// parse error, 10 NonHalting, 11 Exhausted, 12 INCONCLUSIVE.
inline constexpr int kExitOk = 0;
inline constexpr int kExitDiagnostics = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNonHalting = 10;
inline constexpr int kExitExhausted = 11;
inline constexpr int kExitInconclusive = 12;

// The itrm command line: subcommands run, fmt, check, gen, recognize.
// Separated from main() so tests can drive it in-process.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace itrm::cli
