#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace cotkit {

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

/// Reduced invariant suite over the numeric core: scoring constants,
/// propagation, selection against brute force, kernel and EI values, GP
/// interpolation, Pareto against brute force, power-law recovery and the
/// t-test. Every check is seeded from `seed`.
std::vector<CheckResult> run_selfcheck(std::uint64_t seed = 0);

}  // namespace cotkit
