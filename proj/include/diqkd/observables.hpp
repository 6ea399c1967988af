#pragma once

// Heralding probability, conditional error rate and conditional CHSH
// winning probability of each architecture, mixed over the source photon
// statistics; ideal-source closed forms and transmission counts.

#include "diqkd/clickdist.hpp"
#include "diqkd/sources.hpp"
#include "diqkd/types.hpp"

namespace diqkd {

struct SetupParams {
    Architecture arch = Architecture::esr;
    double eta_c = 1.0;
    double eta_d = 1.0;
    /// Channel loss in dB between Alice and the amplifier(s).
    double loss_db = 0.0;
    double p_d = 0.0;
    /// Beamsplitter transmittance inside the polarization amplifier.
    double t = 0.5;
    /// Alice's entanglement source (central source for two amplifiers).
    SourceSpec source_ab;
    /// Entanglement source inside each relay amplifier.
    SourceSpec source_bc;
    /// Both single-photon sources inside the polarization amplifier.
    SourceSpec single_photon;

    double zeta_cd() const { return eta_c * eta_d; }
    double eta_ch() const;
    /// Efficiency of the path from Alice's source to the amplifier's
    /// detectors. With two amplifiers each arm carries half the loss in dB.
    double zeta_cchd() const;
    CircuitParams circuit() const;

    /// Throws std::invalid_argument on out-of-range parameters.
    void validate() const;
};

struct HeraldedObservables {
    double p_sh = 0.0;
    double omega_sh = 0.0;
    double q_sh = 0.0;
    double s_sh = 0.0;
    /// Probability of the canonical herald (per-herald, trigger-conditioned).
    double p_omega = 0.0;
    /// Trigger probability of one single-photon source (1 when unused).
    double p_trigger = 1.0;
    /// False when no heralding event can occur; Q, omega and S are then 0.
    bool feasible = false;
};

/// Full pipeline: mixture over source photon numbers of the first-order
/// noisy, post-processed conditional distributions.
HeraldedObservables heralded_observables(const SetupParams& setup,
                                         HeraldCache& cache = default_herald_cache());

/// Ideal sources, no dark counts, no channel loss; xi = eta_cd^2.
HeraldedObservables esr_ideal_closed_form(double xi);
HeraldedObservables pqa_ideal_closed_form(double xi, double t);

/// Ideal singlet without amplifier: Q = (1-eta)/2 and omega = (sqrt2 eta + 2)/4.
HeraldedObservables unassisted_ideal_closed_form(double eta_ch);

/// <N> = n_sh / p_sh; +inf when p_sh = 0.
double expected_transmissions(double n_sh, double p_sh);

/// First-order-in-p_d transmission counts of the relay and polarization
/// amplifiers for ideal sources.
double esr_expected_transmissions(double n_sh, double eta_cd, double eta_ch, double p_d);
double pqa_expected_transmissions(double n_sh, double eta_cd, double eta_ch, double p_d, double t);

/// Loss in dB at which the relay amplifier with ideal sources and no dark
/// counts needs exactly n_cap transmissions.
double esr_cutoff_loss_db(double n_sh, double eta_cd, double n_cap = 1e15);

/// Session duration in seconds for <N> signals at the given clock rate.
double session_time(double n_expected, double clock_hz);

}  // namespace diqkd
