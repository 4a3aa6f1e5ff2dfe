#pragma once

#include <cstdint>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

namespace fracscat {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool passed = false;
    std::string detail;
    double seconds = 0.0;
};

struct AcceptanceOptions {
    bool slow = false;            ///< d = 3 heavy tiers (Born spot check, 48^3 resolvent scan)
    std::uint64_t seed = 1;
    std::vector<int> only;        ///< empty runs all criteria
    std::function<void(const CriterionResult&)> on_result;
};

/// Number of acceptance criteria.
inline constexpr int acceptance_count = 11;

/// Runs the selected criteria in order; numeric exceptions inside a criterion mark it failed.
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opts = {});

/// "PASS  3 far-field asymptote (0.4 s): ..." style line.
std::string format_result(const CriterionResult& r);

} // namespace fracscat
