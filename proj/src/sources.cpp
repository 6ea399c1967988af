#include "diqkd/sources.hpp"

#include <cmath>
#include <stdexcept>

#include "diqkd/numeric.hpp"

namespace diqkd {

namespace {

void fold_tail(std::vector<double>& probs) {
    KahanSum head;
    for (std::size_t n = 0; n + 1 < probs.size(); ++n) head.add(probs[n]);
    probs.back() = std::max(0.0, 1.0 - head.value());
}

void check_n_max(int n_max) {
    if (n_max < 1) throw std::invalid_argument("truncation order n_max must be at least 1");
}

}  // namespace

std::string to_string(SourceFamily family) {
    switch (family) {
        case SourceFamily::ideal: return "ideal";
        case SourceFamily::pdc: return "pdc";
        case SourceFamily::triggered: return "triggered";
        case SourceFamily::generic: return "generic";
        case SourceFamily::custom: return "custom";
    }
    return "unknown";
}

SourceFamily source_family_from_string(const std::string& name) {
    for (auto f : {SourceFamily::ideal, SourceFamily::pdc, SourceFamily::triggered,
                   SourceFamily::generic, SourceFamily::custom}) {
        if (to_string(f) == name) return f;
    }
    throw std::invalid_argument("unknown source family '" + name + "'");
}

double PhotonStatistics::half_mean() const {
    KahanSum s;
    for (int n = 0; n <= n_max(); ++n) s.add(n * probs[n]);
    return 0.5 * s.value();
}

double PhotonStatistics::total() const {
    KahanSum s;
    for (double p : probs) s.add(p);
    return s.value();
}

PhotonStatistics ideal_statistics(int n_max) {
    check_n_max(n_max);
    PhotonStatistics s;
    s.family = SourceFamily::ideal;
    s.probs.assign(n_max + 1, 0.0);
    s.probs[1] = 1.0;
    return s;
}

PhotonStatistics pdc_statistics(double lambda, int n_max) {
    check_n_max(n_max);
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
        throw std::invalid_argument("PDC intensity lambda must be finite and non-negative");
    }
    PhotonStatistics s;
    s.family = SourceFamily::pdc;
    s.parameter = lambda;
    s.probs.assign(n_max + 1, 0.0);
    const double base = 1.0 / (1.0 + lambda);
    const double ratio = lambda * base;
    for (int n = 0; n < n_max; ++n) {
        s.probs[n] = (n + 1) * std::pow(ratio, n) * base * base;
    }
    fold_tail(s.probs);
    return s;
}

PhotonStatistics generic_statistics(double p0, double q) {
    if (!(p0 >= 0.0 && p0 < 1.0)) throw std::invalid_argument("generic source needs 0 <= p0 < 1");
    if (!(q >= 0.0) || !std::isfinite(q)) {
        throw std::invalid_argument("generic source needs a finite ratio q >= 0");
    }
    PhotonStatistics s;
    s.family = SourceFamily::generic;
    s.parameter = p0;
    s.q = q;
    const double p1 = (1.0 - p0) / (1.0 + q);
    s.probs = {p0, p1, q * p1};
    return s;
}

PhotonStatistics custom_statistics(std::vector<double> probs) {
    if (probs.size() < 2) throw std::invalid_argument("custom statistics need at least two bins");
    KahanSum total;
    for (double p : probs) {
        if (!(p >= 0.0) || !std::isfinite(p)) {
            throw std::invalid_argument("custom statistics must be finite and non-negative");
        }
        total.add(p);
    }
    if (std::fabs(total.value() - 1.0) > 1e-9) {
        throw std::invalid_argument("custom statistics must sum to one (got " +
                                    std::to_string(total.value()) + ")");
    }
    for (double& p : probs) p /= total.value();
    PhotonStatistics s;
    s.family = SourceFamily::custom;
    s.probs = std::move(probs);
    return s;
}

double q_pdc(double p0) {
    if (!(p0 > 0.0 && p0 <= 1.0)) throw std::invalid_argument("q_pdc needs 0 < p0 <= 1");
    const double r = 1.0 / std::sqrt(p0);
    return (r - 1.0) * (r + 2.0) / 2.0;
}

double lambda_from_p0(double p0) {
    if (!(p0 > 0.0 && p0 <= 1.0)) throw std::invalid_argument("lambda_from_p0 needs 0 < p0 <= 1");
    return 1.0 / std::sqrt(p0) - 1.0;
}

TriggeredSource triggered_source(double mu, double zeta_cd, double p_d, int n_max) {
    check_n_max(n_max);
    if (!(mu >= 0.0) || !std::isfinite(mu)) {
        throw std::invalid_argument("triggered source needs a finite mean pair number mu >= 0");
    }
    if (!(zeta_cd >= 0.0 && zeta_cd <= 1.0)) {
        throw std::invalid_argument("trigger efficiency outside [0, 1]");
    }
    if (!(p_d >= 0.0 && p_d < 1.0)) throw std::invalid_argument("dark-count rate outside [0, 1)");
    if (zeta_cd == 0.0 && p_d == 0.0) {
        throw std::invalid_argument(
            "triggered source with zero efficiency and no dark counts can never trigger");
    }
    TriggeredSource out;
    out.r.family = SourceFamily::triggered;
    out.r.parameter = mu;
    out.r.probs.assign(n_max + 1, 0.0);
    const double mz = mu * zeta_cd;
    out.p_trigger = (p_d + mz) / ((1.0 + mz) * (1.0 + mz));
    if (out.p_trigger == 0.0) {
        // mu = 0 without dark counts: the conditional state is the mu -> 0
        // limit, a single photon.
        out.r.probs[1] = 1.0;
        return out;
    }
    // r_n = p_n [(1-p_d) n z (1-z)^(n-1) + p_d (1-z)^n] / P_trigger with
    // p_n = mu^n/(1+mu)^(n+1).
    const double base = 1.0 / (1.0 + mu);
    const double ratio = mu * base;
    for (int n = 0; n < n_max; ++n) {
        const double pn = std::pow(ratio, n) * base;
        const double click = n == 0 ? 0.0 : n * zeta_cd * std::pow(1.0 - zeta_cd, n - 1);
        const double dark = std::pow(1.0 - zeta_cd, n);
        out.r.probs[n] = pn * ((1.0 - p_d) * click + p_d * dark) / out.p_trigger;
    }
    fold_tail(out.r.probs);
    return out;
}

TriggeredSource ideal_single_photon(int n_max) {
    check_n_max(n_max);
    TriggeredSource out;
    out.p_trigger = 1.0;
    out.r = ideal_statistics(n_max);
    return out;
}

PhotonStatistics pair_statistics(const SourceSpec& spec) {
    switch (spec.family) {
        case SourceFamily::ideal: return ideal_statistics(spec.n_max);
        case SourceFamily::pdc: return pdc_statistics(spec.intensity, spec.n_max);
        case SourceFamily::generic: return generic_statistics(spec.p0, spec.q);
        case SourceFamily::custom: return custom_statistics(spec.probs);
        case SourceFamily::triggered: break;
    }
    throw std::invalid_argument("a triggered source cannot serve as an entanglement source");
}

TriggeredSource single_photon_source(const SourceSpec& spec, double zeta_cd, double p_d) {
    switch (spec.family) {
        case SourceFamily::ideal: return ideal_single_photon(spec.n_max);
        case SourceFamily::triggered:
            return triggered_source(spec.intensity, zeta_cd, p_d, spec.n_max);
        default: break;
    }
    throw std::invalid_argument("single-photon sources must be 'ideal' or 'triggered', not '" +
                                to_string(spec.family) + "'");
}

}  // namespace diqkd
