#pragma once

// Closed-form conditional click-pattern distributions of the four
// architectures, first-order dark-count noise, Alice's outcome flip and the
// deterministic binary assignment.
//
// Each pattern probability is the squared norm of the projected state,
// written as a sum over loss-mode occupations of squared amplitudes. The
// amplitude for one loss occupation is a finite sum of products of three
// kinds of factors, each evaluated term by term with log-factorials, an
// explicit sign and compensated summation:
//   loss splitting      x^p -> sum_k C(p,k) T^k R^(p-k) x'^k l^(p-k)
//   balanced splitter   b^k c^r -> b'^tau c'^(k+r-tau)
//   polarization turn   h^p v^q -> h'^alpha v'^(p+q-alpha)
// Powers are applied with their net exponents, so zero efficiencies or
// angles with vanishing sine or cosine need no special casing.

#include <array>
#include <cstddef>
#include <memory>
#include <vector>

#include "diqkd/types.hpp"

namespace diqkd {

/// Probability of one click pattern for the given architecture and
/// conditioning tuple (noiseless).
double pattern_probability(Architecture arch, const std::vector<int>& counts,
                           const ClickPattern& pattern, const CircuitParams& params,
                           double theta_a, double theta_b);

/// True when the pattern satisfies the architecture's noiseless support bounds.
bool within_support(Architecture arch, const std::vector<int>& counts, const ClickPattern& pattern);

/// Full noiseless distribution over the support of the conditioning tuple.
CondDistribution cond_distribution(Architecture arch, const std::vector<int>& counts,
                                   const CircuitParams& params, double theta_a, double theta_b);

CondDistribution esr_cond_distribution(int n, int n_prime, double zeta_cd, double zeta_cchd,
                                       double theta_a, double theta_b);

/// n1, n2: photon numbers of the horizontally and vertically polarized
/// single-photon sources inside the amplifier.
CondDistribution pqa_cond_distribution(int n, int n1, int n2, double zeta_cd, double zeta_cchd,
                                       double t, double theta_a, double theta_b);

/// n1: central source; n2: Alice's relay source; n3: Bob's relay source.
/// zeta_cchd is the efficiency of each half of the channel.
CondDistribution two_esr_cond_distribution(int n1, int n2, int n3, double zeta_cd,
                                           double zeta_cchd, double theta_a, double theta_b);

CondDistribution unassisted_cond_distribution(int n, double eta_ch, double theta_a,
                                              double theta_b);

/// First-order dark-count model: every pattern keeps weight (1 - D p_d) and
/// passes p_d to each of its D single-detector successors.
CondDistribution apply_dark_counts(const CondDistribution& dist, double p_d, int num_detectors);

/// Flips Alice's counters when requested, then maps each party's counters to
/// 0 if they read exactly (1,0) and to 1 otherwise.
BinaryOutcomeDistribution postprocess(const CondDistribution& dist, bool flip_alice);

/// Whether Alice's counters are swapped before the binary assignment.
bool flips_alice(Architecture arch);

/// Canonical heralding block: (1,1,0,0) per amplifier; empty without one.
std::vector<int> canonical_herald(Architecture arch);

/// Post-processed probabilities of (A_A, A_B) jointly with the canonical
/// herald, split as noisy = (1 - D p_d) * base + p_d * neighbor so a single
/// evaluation serves every dark-count rate. Index = 2 * A_A + A_B.
struct HeraldTable {
    std::array<double, 4> base{};
    std::array<double, 4> neighbor{};

    std::array<double, 4> noisy(double p_d, int num_detectors) const;
};

HeraldTable herald_table(Architecture arch, const std::vector<int>& counts,
                         const CircuitParams& params, double theta_a, double theta_b);

/// Thread-safe memoized wrapper around herald_table, keyed on the
/// architecture, conditioning tuple, quantized parameters and angles.
class HeraldCache {
  public:
    explicit HeraldCache(std::size_t capacity = 200000);
    ~HeraldCache();
    HeraldCache(const HeraldCache&) = delete;
    HeraldCache& operator=(const HeraldCache&) = delete;

    HeraldTable get(Architecture arch, const std::vector<int>& counts,
                    const CircuitParams& params, double theta_a, double theta_b);

    std::size_t size() const;
    std::size_t hits() const;
    std::size_t misses() const;
    /// Maximum number of entries; the cache is flushed when it fills up.
    void set_capacity(std::size_t capacity);
    void clear();

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Process-wide cache used by the observables layer.
HeraldCache& default_herald_cache();

}  // namespace diqkd
