#pragma once

// Photon-pair number statistics for the entanglement sources and the
// triggered single-photon sources.

#include <string>
#include <vector>

namespace diqkd {

enum class SourceFamily { ideal, pdc, triggered, generic, custom };

std::string to_string(SourceFamily family);
SourceFamily source_family_from_string(const std::string& name);

/// Truncated distribution p_0..p_{n_max}. Constructors fold the tail mass
/// beyond n_max into the top bin so the list sums to one.
struct PhotonStatistics {
    std::vector<double> probs;
    SourceFamily family = SourceFamily::ideal;
    /// lambda for pdc, mu for triggered, p0 for generic; unused otherwise.
    double parameter = 0.0;
    /// p2/p1 ratio for the generic family.
    double q = 0.0;

    int n_max() const { return static_cast<int>(probs.size()) - 1; }
    double p(int n) const { return (n >= 0 && n <= n_max()) ? probs[n] : 0.0; }
    /// Half the expected number of photons, i.e. (1/2) sum n p_n.
    double half_mean() const;
    double total() const;
};

PhotonStatistics ideal_statistics(int n_max = 3);

/// p_n = (n+1) lambda^n / (1+lambda)^(n+2) for n < n_max.
PhotonStatistics pdc_statistics(double lambda, int n_max = 3);

/// Three-bin statistics with vacuum p0 and ratio q = p2/p1.
PhotonStatistics generic_statistics(double p0, double q);

/// Explicit list; must be non-negative and sum to one within 1e-9 (it is
/// then rescaled exactly).
PhotonStatistics custom_statistics(std::vector<double> probs);

/// p2/p1 of a PDC source truncated to three bins, as a function of its vacuum
/// probability.
double q_pdc(double p0);

/// PDC intensity with vacuum probability p0 = 1/(1+lambda)^2.
double lambda_from_p0(double p0);

struct TriggeredSource {
    double p_trigger = 1.0;
    /// Signal-mode photon statistics conditioned on a trigger.
    PhotonStatistics r;
};

/// Triggered PDC source with p_n = mu^n/(1+mu)^(n+1) whose idler is measured
/// by a detector of efficiency zeta_cd and dark-count rate p_d; a trigger is
/// a single click.
TriggeredSource triggered_source(double mu, double zeta_cd, double p_d, int n_max = 3);

/// A perfect on-demand single photon: trigger probability one and r_1 = 1.
TriggeredSource ideal_single_photon(int n_max = 3);

/// Declarative description of a source used by configs and the optimizer.
struct SourceSpec {
    SourceFamily family = SourceFamily::ideal;
    /// lambda (pdc) or mu (triggered).
    double intensity = 0.0;
    double p0 = 0.0;
    double q = 0.0;
    std::vector<double> probs;
    int n_max = 3;
};

/// Statistics of an entanglement source; the triggered family is rejected.
PhotonStatistics pair_statistics(const SourceSpec& spec);

/// Single-photon source inside the polarization amplifier: ideal or
/// triggered; other families are rejected.
TriggeredSource single_photon_source(const SourceSpec& spec, double zeta_cd, double p_d);

}  // namespace diqkd
