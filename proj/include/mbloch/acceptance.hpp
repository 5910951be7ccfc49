#pragma once

#include "mbloch/diagnostics.hpp"
#include "mbloch/integrate.hpp"

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace mbloch {

/// Settings shared by every acceptance criterion.
struct AcceptanceOptions {
    IntegratorConfig integrator;   ///< base integrator settings (tolerances, renormalize flag)
    std::uint64_t seed = 20260101;  ///< RNG seed for the random draws
    std::size_t workers = 1;
    std::vector<int> criteria;      ///< ids to run; empty runs all
};

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    double seconds = 0.0;
    VerificationReport report;

    /// "PASS  3 gauge-equivariance  trace 1.2e-13 <= 1e-09, ..." style summary.
    [[nodiscard]] std::string line() const;
};

inline constexpr int kCriterionCount = 10;

[[nodiscard]] std::string criterion_name(int id);
[[nodiscard]] CriterionResult run_criterion(int id, const AcceptanceOptions& options);
[[nodiscard]] std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options);

}  // namespace mbloch
