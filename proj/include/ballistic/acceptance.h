#pragma once

#include <cstdint>
#include <functional>
#include <set>
#include <string>
#include <vector>

namespace ballistic {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string detail;
    double seconds = 0;
    double limit_seconds = 0;
};

struct AcceptanceOptions {
    std::uint64_t seed = 20240601;
    int threads = 0;     // 0: OpenMP default
    std::set<int> only;  // empty: all criteria
};

// "[PASS] 04 block-mux-law (1.2 s / 10 s): detail"
std::string format_criterion(const CriterionResult& r);

// Runs the acceptance criteria in order; a criterion passes only if its check
// holds within its time limit. Exceptions count as failures.
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options,
                                            const std::function<void(const CriterionResult&)>& on_result = {});

}  // namespace ballistic
