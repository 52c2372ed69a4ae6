#pragma once

#include <ostream>
#include <string>

namespace trajrepair::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitInput = 2,     // unreadable or invalid scenario, bad arguments
  kExitDomain = 3,    // unresolved or infeasible outcome
  kExitInternal = 4,
};

// Summary lines go to `out`, diagnostics to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// 6 significant digits; "inf" for infinity; a trailing ".0" when the digits
// would otherwise read as an integer.
std::string format_number(double x);

}  // namespace trajrepair::cli
