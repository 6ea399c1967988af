#pragma once

// Types shared by the oracle, the closed-form distributions and the
// observables layer.

#include <array>
#include <compare>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace diqkd {

enum class Architecture { esr, pqa, two_esr, unassisted };

std::string to_string(Architecture arch);
Architecture architecture_from_string(const std::string& name);

/// Number of photon-number-resolving detectors in the architecture's click
/// pattern (4, 8 or 12).
int detector_count(Architecture arch);

/// Number of photon-number entries in the conditioning tuple.
int conditioning_size(Architecture arch);

/// Detector photon counts. Index layout:
///   unassisted: (alpha, beta, gamma, delta)
///   esr, pqa:   (alpha, beta, gamma, delta, mu, nu, tau, lambda)
///   two_esr:    (alpha, beta, gamma, delta, muA, nuA, tauA, lambdaA, muB, nuB, tauB, lambdaB)
struct ClickPattern {
    static constexpr int kMaxSize = 12;
    std::array<std::uint8_t, kMaxSize> counts{};
    std::uint8_t size = 0;

    ClickPattern() = default;
    explicit ClickPattern(const std::vector<int>& values);

    int operator[](int i) const { return counts[i]; }
    void set(int i, int value) { counts[i] = static_cast<std::uint8_t>(value); }
    int total() const;
    std::vector<int> to_vector() const;
    std::string to_string() const;

    auto operator<=>(const ClickPattern&) const = default;
};

/// Efficiency parameters of one optical circuit evaluation. For the
/// unassisted setup zeta_cchd is the channel transmittance and zeta_cd is 1.
struct CircuitParams {
    double zeta_cd = 1.0;
    double zeta_cchd = 1.0;
    double t = 0.5;
};

struct CondDistribution {
    Architecture arch = Architecture::esr;
    std::map<ClickPattern, double> entries;
    std::vector<int> conditioning;
    CircuitParams params;
    double theta_a = 0.0;
    double theta_b = 0.0;
    bool noise_applied = false;
    /// Number of roundoff-negative probabilities that were clipped to 0.
    int clipped = 0;

    double total() const;
    double probability(const ClickPattern& p) const;
};

/// Key (A_A, A_B, herald block) of the post-processed distribution. The
/// herald block holds the amplifier counters (empty for the unassisted setup).
struct OutcomeKey {
    int a_alice = 0;
    int a_bob = 0;
    std::vector<int> herald;
    auto operator<=>(const OutcomeKey&) const = default;
};

struct BinaryOutcomeDistribution {
    std::map<OutcomeKey, double> entries;
    double probability(int a_alice, int a_bob, const std::vector<int>& herald) const;
    /// Total probability of the herald block, summed over both outcomes.
    double herald_probability(const std::vector<int>& herald) const;
};

}  // namespace diqkd
