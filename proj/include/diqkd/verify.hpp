#pragma once

// Self-checks of the closed-form distributions: agreement with the Fock
// oracle, normalization with and without dark counts, support bounds and the
// ideal-source closed forms of the observables.

#include <string>
#include <vector>

namespace diqkd {

struct CheckReport {
    std::string name;
    bool passed = true;
    double max_deviation = 0.0;
    double tolerance = 0.0;
    int cases = 0;
    /// First failing case, empty when everything passed.
    std::string detail;
};

/// Per-pattern comparison with the oracle over the reference grid of
/// conditioning tuples, angles, efficiencies and transmittances.
std::vector<CheckReport> verify_oracle();

/// Sums of noiseless (within 1e-9) and first-order noisy (within 1e-12)
/// distributions over the reference grid.
std::vector<CheckReport> verify_normalization();

/// Noiseless patterns stay inside the support bounds; noisy patterns exceed
/// them by at most one count.
std::vector<CheckReport> verify_support();

/// Pipeline observables against the ideal-source closed forms (1e-9).
std::vector<CheckReport> verify_closed_form();

/// Scopes: "oracle", "normalization", "support", "closed-form" or "all".
std::vector<CheckReport> run_verification(const std::string& scope);

}  // namespace diqkd
