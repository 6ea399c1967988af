#include "diqkd/observables.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "diqkd/numeric.hpp"

namespace diqkd {

namespace {

constexpr double kPi = std::numbers::pi;

struct AnglePair {
    double a;
    double b;
};

// (0,0) for the error rate, then the four CHSH settings.
constexpr std::array<AnglePair, 5> kAngles{{{0.0, 0.0},
                                            {0.0, -kPi / 8},
                                            {0.0, kPi / 8},
                                            {kPi / 4, -kPi / 8},
                                            {kPi / 4, kPi / 8}}};

using Accumulated = std::array<std::array<KahanSum, 4>, kAngles.size()>;

void accumulate(Accumulated& acc, double weight, Architecture arch,
                const std::vector<int>& counts, const CircuitParams& circuit, double p_d,
                HeraldCache& cache) {
    if (weight <= 0.0) return;
    const int D = detector_count(arch);
    for (std::size_t k = 0; k < kAngles.size(); ++k) {
        HeraldTable table = cache.get(arch, counts, circuit, kAngles[k].a, kAngles[k].b);
        auto noisy = table.noisy(p_d, D);
        for (int c = 0; c < 4; ++c) acc[k][c].add(weight * noisy[c]);
    }
}

double herald_multiplicity(Architecture arch) {
    switch (arch) {
        case Architecture::esr:
        case Architecture::pqa: return 4.0;
        case Architecture::two_esr: return 16.0;
        case Architecture::unassisted: return 1.0;
    }
    return 1.0;
}

}  // namespace

double SetupParams::eta_ch() const { return std::pow(10.0, -loss_db / 10.0); }

double SetupParams::zeta_cchd() const {
    const double channel =
        arch == Architecture::two_esr ? std::pow(10.0, -loss_db / 20.0) : eta_ch();
    return eta_c * eta_d * channel;
}

CircuitParams SetupParams::circuit() const { return {zeta_cd(), zeta_cchd(), t}; }

void SetupParams::validate() const {
    auto in_unit = [](double x) { return x > 0.0 && x <= 1.0; };
    if (!in_unit(eta_c)) throw std::invalid_argument("eta_c must lie in (0, 1]");
    if (!in_unit(eta_d)) throw std::invalid_argument("eta_d must lie in (0, 1]");
    if (!(loss_db >= 0.0) || !std::isfinite(loss_db)) {
        throw std::invalid_argument("channel loss must be a finite number of dB >= 0");
    }
    const int D = detector_count(arch);
    if (!(p_d >= 0.0 && p_d * D <= 1.0)) {
        throw std::invalid_argument("dark-count rate must satisfy 0 <= p_d <= 1/" +
                                    std::to_string(D));
    }
    if (arch == Architecture::pqa && !(t > 0.0 && t < 1.0)) {
        throw std::invalid_argument("transmittance t must lie in (0, 1)");
    }
    if (arch == Architecture::unassisted && zeta_cd() != 1.0) {
        throw std::invalid_argument(
            "the unassisted setup models channel loss only; set eta_c = eta_d = 1");
    }
}

HeraldedObservables heralded_observables(const SetupParams& setup, HeraldCache& cache) {
    setup.validate();
    const Architecture arch = setup.arch;
    const CircuitParams circuit = setup.circuit();
    const PhotonStatistics ab = pair_statistics(setup.source_ab);
    Accumulated acc;
    HeraldedObservables out;

    switch (arch) {
        case Architecture::esr: {
            const PhotonStatistics bc = pair_statistics(setup.source_bc);
            for (int n = 0; n <= ab.n_max(); ++n)
                for (int m = 0; m <= bc.n_max(); ++m)
                    accumulate(acc, ab.p(n) * bc.p(m), arch, {n, m}, circuit, setup.p_d, cache);
            break;
        }
        case Architecture::pqa: {
            const TriggeredSource single =
                single_photon_source(setup.single_photon, setup.zeta_cd(), setup.p_d);
            out.p_trigger = single.p_trigger;
            const PhotonStatistics& r = single.r;
            for (int n = 0; n <= ab.n_max(); ++n)
                for (int n1 = 0; n1 <= r.n_max(); ++n1)
                    for (int n2 = 0; n2 <= r.n_max(); ++n2)
                        accumulate(acc, ab.p(n) * r.p(n1) * r.p(n2), arch, {n, n1, n2}, circuit,
                                   setup.p_d, cache);
            break;
        }
        case Architecture::two_esr: {
            const PhotonStatistics bc = pair_statistics(setup.source_bc);
            for (int n1 = 0; n1 <= ab.n_max(); ++n1)
                for (int n2 = 0; n2 <= bc.n_max(); ++n2)
                    for (int n3 = 0; n3 <= bc.n_max(); ++n3)
                        accumulate(acc, ab.p(n1) * bc.p(n2) * bc.p(n3), arch, {n1, n2, n3},
                                   circuit, setup.p_d, cache);
            break;
        }
        case Architecture::unassisted: {
            for (int n = 0; n <= ab.n_max(); ++n)
                accumulate(acc, ab.p(n), arch, {n}, circuit, setup.p_d, cache);
            break;
        }
    }

    std::array<double, kAngles.size()> p_omega{};
    std::array<double, kAngles.size()> correlator{};
    for (std::size_t k = 0; k < kAngles.size(); ++k) {
        const double p00 = acc[k][0].value(), p01 = acc[k][1].value();
        const double p10 = acc[k][2].value(), p11 = acc[k][3].value();
        p_omega[k] = p00 + p01 + p10 + p11;
        correlator[k] = p_omega[k] > 0.0 ? 2.0 * (p00 + p11) / p_omega[k] - 1.0 : 0.0;
    }
    out.p_omega = p_omega[0];
    const double trigger_weight =
        arch == Architecture::pqa ? out.p_trigger * out.p_trigger : 1.0;
    out.p_sh = herald_multiplicity(arch) * trigger_weight * out.p_omega;
    out.feasible = out.p_omega > 0.0 && out.p_sh > 0.0;
    if (!out.feasible) return out;

    out.q_sh = (acc[0][1].value() + acc[0][2].value()) / out.p_omega;
    const auto& E = correlator;
    if (arch == Architecture::esr) {
        out.s_sh = E[1] + E[2] + E[3] - E[4];
    } else {
        out.s_sh = E[1] + E[2] - E[3] + E[4];
    }
    out.omega_sh = out.s_sh / 8.0 + 0.5;
    return out;
}

HeraldedObservables esr_ideal_closed_form(double xi) {
    if (!(xi > 0.0 && xi <= 1.0)) throw std::invalid_argument("xi must lie in (0, 1]");
    HeraldedObservables o;
    const double tsirelson = (2.0 + std::numbers::sqrt2) / 4.0;
    o.p_sh = xi * xi / 2.0;
    o.p_omega = o.p_sh / 4.0;
    o.omega_sh = tsirelson * xi * xi + 0.75 * (1 - xi) * (1 - xi) + xi * (1 - xi);
    o.q_sh = xi * (1 - xi);
    o.s_sh = 8.0 * (o.omega_sh - 0.5);
    o.feasible = true;
    return o;
}

HeraldedObservables pqa_ideal_closed_form(double xi, double t) {
    if (!(xi > 0.0 && xi <= 1.0)) throw std::invalid_argument("xi must lie in (0, 1]");
    if (!(t > 0.0 && t < 1.0)) throw std::invalid_argument("t must lie in (0, 1)");
    HeraldedObservables o;
    const double tsirelson = (2.0 + std::numbers::sqrt2) / 4.0;
    const double d = 1.0 - xi * (1.0 - t);
    o.p_sh = (1.0 - t) * xi * xi * d;
    o.p_omega = o.p_sh / 4.0;
    o.omega_sh = (tsirelson * t * xi * xi + 0.75 * (1 - xi) * (1 - xi) +
                  0.5 * (1 + t) * xi * (1 - xi)) /
                 d;
    o.q_sh = (1 + t) * xi * (1 - xi) / (2.0 * d);
    o.s_sh = 8.0 * (o.omega_sh - 0.5);
    o.feasible = true;
    return o;
}

HeraldedObservables unassisted_ideal_closed_form(double eta_ch) {
    if (!(eta_ch >= 0.0 && eta_ch <= 1.0)) throw std::invalid_argument("eta_ch outside [0, 1]");
    HeraldedObservables o;
    o.p_sh = 1.0;
    o.p_omega = 1.0;
    o.q_sh = (1.0 - eta_ch) / 2.0;
    o.omega_sh = (std::numbers::sqrt2 * eta_ch + 2.0) / 4.0;
    o.s_sh = 8.0 * (o.omega_sh - 0.5);
    o.feasible = true;
    return o;
}

double expected_transmissions(double n_sh, double p_sh) {
    if (!(n_sh > 0.0)) throw std::invalid_argument("block size must be positive");
    if (!(p_sh > 0.0)) return std::numeric_limits<double>::infinity();
    return n_sh / p_sh;
}

double esr_expected_transmissions(double n_sh, double eta_cd, double eta_ch, double p_d) {
    const double e2 = eta_cd * eta_cd;
    const double rate =
        (1.0 - 4.0 * p_d) * eta_ch * e2 + 4.0 * p_d * (1.0 + eta_ch * (1.0 - 2.0 * e2));
    return 2.0 * n_sh / (e2 * rate);
}

double pqa_expected_transmissions(double n_sh, double eta_cd, double eta_ch, double p_d,
                                  double t) {
    const double e2 = eta_cd * eta_cd;
    const double rate =
        (1.0 - 10.0 * p_d) * (1.0 - t) * eta_ch * e2 + 4.0 * p_d * (1.0 - t + eta_ch / 2.0);
    return n_sh / (e2 * (1.0 - e2 * (1.0 - t)) * rate);
}

double esr_cutoff_loss_db(double n_sh, double eta_cd, double n_cap) {
    const double e4 = std::pow(eta_cd, 4);
    return 10.0 * std::log10(n_cap) - 10.0 * std::log10(2.0 * n_sh / e4);
}

double session_time(double n_expected, double clock_hz) {
    if (!(n_expected >= 0.0) || !(clock_hz > 0.0)) {
        throw std::invalid_argument("session time needs <N> >= 0 and a positive clock rate");
    }
    if (std::isinf(clock_hz)) return 0.0;
    return n_expected / clock_hz;
}

}  // namespace diqkd
