#pragma once

#include <string>
#include <vector>

namespace ndo {

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;  // measured value vs bound, for diagnostics
};

// Fast invariant suite backing the `validate` subcommand (< 30 s): Wigner
// calibration points, grid normalization, master-equation state invariants,
// the exact decay law (master and trajectory routes), seed-partition
// invariance, classical scaling covariance, and the linear-limit Lyapunov
// exponent.
std::vector<CheckResult> run_selfcheck();

}  // namespace ndo
