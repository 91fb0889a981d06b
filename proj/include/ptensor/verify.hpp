#pragma once

// Acceptance criteria as runnable checks. Each check reports correctness and
// wall time; a criterion passes only if it is correct and within budget.

#include <cstdint>
#include <string>
#include <vector>

namespace ptensor {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool correct = false;
    std::string detail;
    double seconds = 0.0;
    double budget = 0.0;

    bool passed() const noexcept { return correct && seconds < budget; }
};

/// Runs criterion 1..9. Throws ContractError on an unknown id.
CriterionResult run_criterion(int id, std::uint64_t seed = 0);

/// Criteria 1..10; criterion 10 passes when 1..9 all pass.
std::vector<CriterionResult> run_acceptance(std::uint64_t seed = 0);

/// counts -> 1,2,8; burnside -> 3; rank -> 4; equivariance -> 5,6,7; gnn -> 9.
/// Throws ContractError on an unknown suite name.
std::vector<int> suite_criteria(const std::string& suite);

/// "[PASS] 3 burnside oracle: ... (0.01s / 10s)"
std::string format_result(const CriterionResult& r);

}  // namespace ptensor
