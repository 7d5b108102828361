// Self-checks behind `qcd validate`: KL regressions, recursion oracles,
// martingale identity and empirical bound satisfaction.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace qcd {

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct ValidationOptions {
    double rho0 = 0.0;
    double rho1 = 0.5;
    double rho_assumed = 0.3;
    double p0 = 0.1;
    std::uint64_t trials = 10000;
    std::uint64_t horizon = 100000;
    std::uint64_t seed = 0;
    unsigned workers = 0;
};

/// Runs every check. Monte Carlo tolerances are multiples of the sample
/// standard error, so small trial counts widen rather than break them.
std::vector<CheckResult> run_validation(const ValidationOptions& options);

}  // namespace qcd
