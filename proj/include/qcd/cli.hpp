// Command-line front end: kl, bounds, simulate, sweep and validate subcommands.
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace qcd::cli {

enum ExitStatus : int {
    kSuccess = 0,
    kCheckFailure = 1,
    kUsageError = 2,
    kIoError = 3,
};

/// Column order of the simulate/sweep CSV output.
inline const std::vector<std::string> kSweepColumns = {
    "log_threshold", "procedure", "add",       "add_stderr", "pfa",       "pfa_stderr",
    "arl",           "arl_stderr", "n_censored", "bound_add", "bound_pfa", "bound_arl"};

/// 17 significant digits; "nan" for unavailable and "inf" for infinite values.
std::string format_number(double value);

/// Parses and executes one invocation. Results go to `out` unless --out names a
/// file; diagnostics go to `err`. Returns an ExitStatus.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qcd::cli
