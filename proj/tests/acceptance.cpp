// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "commands.hpp"
#include "config.hpp"
#include "diqkd/clickdist.hpp"
#include "diqkd/optimizer.hpp"
#include "diqkd/verify.hpp"

using namespace diqkd;

namespace {

const double kTsirelson = (2.0 + std::numbers::sqrt2) / 4.0;

struct Outcome {
    bool passed = true;
    std::string detail;
};

int failures = 0;

void run(int id, const std::string& title, double time_limit_s, const std::function<Outcome()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (elapsed > time_limit_s) {
        o.passed = false;
        o.detail += " [over time limit]";
    }
    if (!o.passed) ++failures;
    std::printf("[%2d] %s  %s: %s (%.1f s)\n", id, o.passed ? "PASS" : "FAIL", title.c_str(),
                o.detail.c_str(), elapsed);
    std::fflush(stdout);
}

std::string fmt(const char* format, double a) {
    char buf[128];
    std::snprintf(buf, sizeof buf, format, a);
    return buf;
}

Outcome from_reports(const std::vector<CheckReport>& reports) {
    Outcome o;
    for (const auto& r : reports) {
        if (!o.detail.empty()) o.detail += "; ";
        o.detail += r.name + " max_dev=" + fmt("%.2e", r.max_deviation) + " over " +
                    std::to_string(r.cases) + " cases";
        if (!r.passed) {
            o.passed = false;
            o.detail += " first failure: " + r.detail;
        }
    }
    return o;
}

/// Root of an increasing function on [lo, hi] by bisection.
double bisect_increasing(const std::function<double(double)>& f, double lo, double hi, double tol) {
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (f(mid) >= 0.0) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return 0.5 * (lo + hi);
}

SetupParams relay_ideal(double eta, double loss, double p_d) {
    SetupParams s;
    s.arch = Architecture::esr;
    s.eta_c = s.eta_d = eta;
    s.loss_db = loss;
    s.p_d = p_d;
    return s;
}

SetupParams with_pdc(SetupParams s) {
    s.source_ab.family = SourceFamily::pdc;
    s.source_ab.intensity = 0.01;
    s.source_bc.family = SourceFamily::pdc;
    s.source_bc.intensity = 0.01;
    s.single_photon.family = SourceFamily::triggered;
    s.single_photon.intensity = 1.0;
    return s;
}

Outcome ideal_threshold() {
    auto k = [](double eta) {
        return asymptotic_rate(heralded_observables(relay_ideal(eta, 0.0, 0.0))) - 1e-10;
    };
    const double root = bisect_increasing(k, 0.9, 1.0, 1e-7);
    return {root >= 0.959 && root <= 0.963, "eta_cd threshold = " + fmt("%.5f", root) + " (band [0.959, 0.963])"};
}

Outcome pdc_thresholds() {
    OptimizationSpec spec;
    spec.objective = Objective::asymptotic_rate;
    auto threshold = [&](Architecture arch) {
        auto k = [&](double eta) {
            SetupParams s = with_pdc(relay_ideal(eta, 0.0, 0.0));
            s.arch = arch;
            s.t = 0.9;
            return maximize_rate(s, security_preset("S1"), 1e10, spec).k_asymptotic - 1e-10;
        };
        return bisect_increasing(k, 0.95, 1.0, 2e-4);
    };
    const double esr = threshold(Architecture::esr);
    const double pqa = threshold(Architecture::pqa);
    const bool ok = esr >= 0.981 && esr <= 0.985 && pqa >= 0.965 && pqa <= 0.969;
    return {ok, "relay " + fmt("%.4f", esr) + " (band [0.981, 0.985]), polarization " +
                    fmt("%.4f", pqa) + " (band [0.965, 0.969])"};
}

Outcome unassisted_max_loss() {
    OptimizationSpec spec;
    spec.objective = Objective::asymptotic_rate;
    LossConstraints c;
    c.threshold = 1e-10;
    c.resolution_db = 0.01;
    c.max_db = 5.0;
    SetupParams s;
    s.arch = Architecture::unassisted;
    const auto ideal = max_tolerable_loss(s, security_preset("S1"), 1e10, spec, c);
    s.source_ab.family = SourceFamily::pdc;
    s.source_ab.intensity = 0.1;
    const auto pdc = max_tolerable_loss(s, security_preset("S1"), 1e10, spec, c);
    if (!ideal.loss_db || !pdc.loss_db) return {false, "infeasible at zero loss"};
    const bool ok = std::fabs(*ideal.loss_db - 0.70) <= 0.05 && std::fabs(*pdc.loss_db - 0.40) <= 0.05;
    return {ok, "ideal " + fmt("%.3f dB", *ideal.loss_db) + " (0.70 +/- 0.05), pdc " +
                    fmt("%.3f dB", *pdc.loss_db) + " (0.40 +/- 0.05)"};
}

Outcome relay_spot_checks() {
    OptimizationSpec spec;
    const auto a = maximize_rate(relay_ideal(1.0, 48.0, 1e-7), security_preset("S1"), 1e7, spec);
    const auto b = maximize_rate(relay_ideal(0.965, 39.0, 1e-7), security_preset("S1"), 1e11, spec);
    const bool ok_a = a.rate.k >= 0.65e-7 && a.rate.k <= 2.6e-7 &&
                      std::fabs(a.rate.n_expected / 1.2e12 - 1.0) <= 0.10;
    const bool ok_b = b.rate.k >= 4.2e-8 / 2 && b.rate.k <= 4.2e-8 * 2;
    return {ok_a && ok_b, "(100%, 1e7, 48 dB) K=" + fmt("%.3e", a.rate.k) + " <N>=" +
                              fmt("%.3e", a.rate.n_expected) + "; (96.5%, 1e11, 39 dB) K=" +
                              fmt("%.3e", b.rate.k)};
}

Outcome polarization_pdc_cutoff() {
    OptimizationSpec spec;
    LossConstraints c;
    c.threshold = 1e-10;
    c.resolution_db = 0.05;
    SetupParams s = with_pdc(relay_ideal(1.0, 0.0, 1e-7));
    s.arch = Architecture::pqa;
    s.t = 0.5;
    const auto m = max_tolerable_loss(s, security_preset("S1"), 1e7, spec, c);
    if (!m.loss_db) return {false, "infeasible at zero loss"};
    const double n = m.at_max.rate.n_expected;
    const bool ok = *m.loss_db >= 20.0 && *m.loss_db <= 26.0 && n >= 1.7e13 / 2 && n <= 1.7e13 * 2;
    return {ok, "loss_max=" + fmt("%.2f dB", *m.loss_db) + " K=" + fmt("%.3e", m.at_max.rate.k) +
                    " <N>=" + fmt("%.3e", n)};
}

Outcome cutoff_closed_form() {
    OptimizationSpec spec;
    LossConstraints c;
    c.threshold = 0.0;
    c.n_cap = 1e15;
    c.resolution_db = 0.05;
    c.max_db = 200.0;
    Outcome o;
    for (auto [eta, n] : std::vector<std::pair<double, double>>{{1.0, 1e7}, {1.0, 1e11}, {0.965, 1e11}}) {
        const auto m = max_tolerable_loss(relay_ideal(eta, 0.0, 0.0), security_preset("S1"), n, spec, c);
        const double expected = esr_cutoff_loss_db(n, eta);
        const double got = m.loss_db ? *m.loss_db : -1.0;
        const bool ok = m.loss_db && std::fabs(got - expected) <= 0.1;
        o.passed = o.passed && ok;
        if (!o.detail.empty()) o.detail += "; ";
        o.detail += fmt("eta=%.3f ", eta) + fmt("n=%.0e: ", n) + fmt("%.2f dB", got) + " vs " +
                    fmt("%.2f dB", expected);
    }
    return o;
}

Outcome convergence() {
    OptimizationSpec spec;
    const SetupParams s = relay_ideal(1.0, 20.0, 1e-7);
    double previous = -1.0;
    bool monotone = true;
    std::string detail;
    double last = 0.0, k_inf = 0.0;
    for (double n : {1e7, 1e9, 1e11, 1e13}) {
        const auto r = maximize_rate(s, security_preset("S1"), n, spec);
        monotone = monotone && r.rate.k >= previous;
        previous = r.rate.k;
        last = r.rate.k;
        k_inf = r.k_asymptotic;
        detail += fmt("K(%.0e)=", n) + fmt("%.4e ", r.rate.k);
    }
    const double ratio = last / k_inf;
    return {monotone && ratio > 0.9, detail + fmt("K(1e13)/K_inf=%.4f", ratio)};
}

Outcome herald_marginal_independence() {
    const std::vector<std::pair<double, double>> angles{
        {0.0, 0.0}, {0.0, -std::numbers::pi / 8}, {0.0, std::numbers::pi / 8},
        {std::numbers::pi / 4, -std::numbers::pi / 8}, {std::numbers::pi / 4, std::numbers::pi / 8}};
    const std::vector<std::pair<Architecture, std::vector<int>>> cases{
        {Architecture::esr, {1, 1}}, {Architecture::esr, {2, 1}}, {Architecture::pqa, {1, 1, 1}},
        {Architecture::pqa, {2, 0, 1}}, {Architecture::two_esr, {1, 1, 1}},
        {Architecture::unassisted, {2}}};
    double worst = 0.0;
    for (const auto& [arch, counts] : cases) {
        const CircuitParams params{arch == Architecture::unassisted ? 1.0 : 0.9, 0.7, 0.6};
        double base_ref = -1.0, neighbor_ref = -1.0;
        for (const auto& [ta, tb] : angles) {
            const HeraldTable t = herald_table(arch, counts, params, ta, tb);
            const double base = t.base[0] + t.base[1] + t.base[2] + t.base[3];
            const double neighbor = t.neighbor[0] + t.neighbor[1] + t.neighbor[2] + t.neighbor[3];
            if (base_ref < 0.0) {
                base_ref = base;
                neighbor_ref = neighbor;
            }
            worst = std::max({worst, std::fabs(base - base_ref), std::fabs(neighbor - neighbor_ref)});
        }
    }
    return {worst < 1e-12, "herald-marginal spread " + fmt("%.2e", worst)};
}

Outcome tsirelson_ceiling() {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = -1.0;
    int samples = 0;
    for (Architecture arch : {Architecture::esr, Architecture::pqa, Architecture::two_esr,
                              Architecture::unassisted}) {
        for (int i = 0; i < 6; ++i) {
            SetupParams s;
            s.arch = arch;
            if (arch != Architecture::unassisted) s.eta_c = s.eta_d = 0.9 + 0.1 * u(rng);
            s.loss_db = (arch == Architecture::unassisted ? 1.0 : 20.0) * u(rng);
            s.p_d = i % 2 ? 1e-6 * u(rng) : 0.0;
            s.t = 0.1 + 0.85 * u(rng);
            if (i >= 3) {
                s = with_pdc(s);
                s.source_ab.intensity = std::pow(10.0, -3.0 * u(rng));
                s.source_bc.intensity = std::pow(10.0, -3.0 * u(rng));
                s.single_photon.intensity = 0.1 + u(rng);
            }
            const auto o = heralded_observables(s);
            if (!o.feasible) continue;
            ++samples;
            worst = std::max(worst, o.omega_sh - kTsirelson);
        }
    }
    return {worst <= 1e-12, "max(omega - Tsirelson) = " + fmt("%.2e", worst) + " over " +
                                std::to_string(samples) + " setups"};
}

Outcome optimizer_determinism() {
    OptimizationSpec spec;
    spec.random_restarts = 3;
    spec.seed = 11;
    SetupParams s = with_pdc(relay_ideal(0.995, 5.0, 1e-7));
    const auto a = maximize_rate(s, security_preset("S1"), 1e11, spec);
    const auto b = maximize_rate(s, security_preset("S1"), 1e11, spec);
    spec.workers = 3;
    default_herald_cache().clear();
    const auto c = maximize_rate(s, security_preset("S1"), 1e11, spec);
    const bool same = a.rate.k == b.rate.k && a.rate.k == c.rate.k &&
                      a.setup.source_ab.intensity == c.setup.source_ab.intensity &&
                      a.setup.source_bc.intensity == c.setup.source_bc.intensity &&
                      a.rate.protocol.gamma == c.rate.protocol.gamma;
    return {same, "K=" + fmt("%.10e", a.rate.k) + " repeated, threaded and cold-cache"};
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

Outcome csv_byte_stability() {
    const std::string text =
        "name: stability\n"
        "architecture: esr\n"
        "setup: {eta_cd: 0.99, p_d: 1.0e-7}\n"
        "sources:\n"
        "  ab: {family: pdc, intensity: 0.01}\n"
        "protocol: {n_sh: 1.0e10}\n"
        "optimization: {random_restarts: 1, grid_points: 3}\n"
        "grid: {loss_db: [0, 3, 6]}\n";
    const auto root = std::filesystem::temp_directory_path() / "diqkd_acceptance_csv";
    std::filesystem::remove_all(root);
    std::vector<std::string> outputs;
    for (int run = 0; run < 3; ++run) {
        cli::ScenarioConfig c = cli::parse_config(text, "stability.yaml");
        c.workers = run == 2 ? 3 : 1;
        c.out_dir = (root / std::to_string(run)).string();
        cli::finalize(c);
        if (run == 2) default_herald_cache().clear();
        std::ostringstream sink;
        cli::run_sweep(c, sink);
        outputs.push_back(slurp(std::filesystem::path(c.out_dir) / "stability_sweep.csv") +
                          slurp(std::filesystem::path(c.out_dir) / "stability_sweep.dat"));
    }
    std::filesystem::remove_all(root);
    const bool same = !outputs[0].empty() && outputs[0] == outputs[1] && outputs[0] == outputs[2];
    return {same, std::to_string(outputs[0].size()) + " bytes identical across runs and worker counts"};
}

Outcome property_suites() {
    std::vector<Outcome> parts;
    parts.push_back(from_reports(verify_normalization()));
    parts.push_back(from_reports(verify_support()));
    parts.push_back(herald_marginal_independence());
    parts.push_back(tsirelson_ceiling());
    parts.push_back(optimizer_determinism());
    parts.push_back(csv_byte_stability());
    Outcome o;
    for (const auto& p : parts) {
        o.passed = o.passed && p.passed;
        o.detail += "\n       " + std::string(p.passed ? "ok   " : "FAIL ") + p.detail;
    }
    return o;
}

}  // namespace

int main() {
    run(1, "oracle equivalence", 300, [] { return from_reports(verify_oracle()); });
    run(2, "normalization", 300, [] { return from_reports(verify_normalization()); });
    run(3, "ideal-source closed forms", 300, [] { return from_reports(verify_closed_form()); });
    run(4, "ideal-source asymptotic threshold", 60, ideal_threshold);
    run(5, "PDC asymptotic thresholds", 3600, pdc_thresholds);
    run(6, "unassisted maximum loss", 3600, unassisted_max_loss);
    run(7, "relay finite-key spot checks", 3600, relay_spot_checks);
    run(8, "polarization amplifier PDC cutoff", 1800, polarization_pdc_cutoff);
    run(9, "cutoff-loss closed form", 3600, cutoff_closed_form);
    run(10, "finite to asymptotic convergence", 3600, convergence);
    run(11, "property suites", 120, property_suites);
    std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
