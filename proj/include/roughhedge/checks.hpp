#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace rh {

struct CheckResult {
    int id = 0;
    std::string name;
    bool passed = false;
    std::string detail;  // deterministic given the seed
    double seconds = 0.0;
    double budget = 0.0;  // runtime limit in seconds; enforced at full scale
    bool within_budget = true;
};

enum class CheckScale {
    quick,  // reduced sample sizes, a few seconds each
    full,   // the acceptance sizes
};

struct CheckOptions {
    CheckScale scale = CheckScale::full;
    std::uint64_t seed = 20240601;
};

constexpr int n_criteria = 8;

// Runs criterion id in [1, n_criteria]; exceptions become a failed result.
CheckResult run_check(int id, const CheckOptions& o = {});
std::vector<CheckResult> run_checks(const CheckOptions& o = {});

}  // namespace rh
