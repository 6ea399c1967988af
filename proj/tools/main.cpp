#include <iostream>

#include "CLI11.hpp"
#include "commands.hpp"

using namespace diqkd::cli;

int main(int argc, char** argv) {
    CLI::App app{"Finite-key rates of DIQKD with qubit amplifiers: evaluation, optimization and sweeps"};
    app.set_version_flag("--version", kToolVersion);
    app.require_subcommand(1);

    Overrides overrides;
    std::string config_path, out_dir, preset;
    std::uint64_t seed = 0;
    int workers = 0;
    app.add_option("--config", config_path, "Scenario file (YAML)")->check(CLI::ExistingFile);
    app.add_option("--out", out_dir, "Output directory (overrides output.dir)");
    app.add_option("--seed", seed, "Random seed for optimizer restarts");
    app.add_option("--workers", workers, "Worker threads (0 = all cores)");
    app.add_option("--preset", preset, "Security preset")->check(CLI::IsMember({"S1", "S2"}));

    auto* rate = app.add_subcommand("rate", "Key rate at the configured, fixed parameters");
    auto* observables = app.add_subcommand("observables", "P_SH, omega and Q over the efficiency/loss grid");
    auto* optimize = app.add_subcommand("optimize", "Optimized key rate at the configured point");
    auto* sweep = app.add_subcommand("sweep", "Key rate over the efficiency x block size x loss grid");
    auto* critical = app.add_subcommand("critical-line", "Critical block size for each efficiency");
    auto* max_loss = app.add_subcommand("max-loss", "Largest tolerable loss for each efficiency and block size");
    auto* qmax = app.add_subcommand("qmax", "Largest relay-source ratio q = p2/p1 per loss");
    auto* verify = app.add_subcommand("verify", "Oracle, normalization, support and closed-form checks");
    std::string scope = "all";
    verify->add_option("--scope", scope, "oracle | normalization | support | closed-form | all");
    auto* session = app.add_subcommand("session-time", "Session duration for <N> signals");
    double n_expected = 0.0;
    double clock_hz = 0.0;
    session->add_option("--n-expected", n_expected, "Expected number of transmitted signals")->required();
    session->add_option("--clock-hz", clock_hz, "Source clock rate (default: session.clock_hz)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    if (!config_path.empty()) overrides.config_path = config_path;
    if (!out_dir.empty()) overrides.out_dir = out_dir;
    if (app.count("--seed")) overrides.seed = seed;
    if (app.count("--workers")) overrides.workers = workers;
    if (!preset.empty()) overrides.preset = preset;

    try {
        if (verify->parsed()) return run_verify(scope, std::cout);
        const ScenarioConfig config = resolve_config(overrides);
        if (session->parsed()) {
            return run_session_time(n_expected, session->count("--clock-hz") ? clock_hz : config.clock_hz,
                                    std::cout);
        }
        if (rate->parsed()) return run_rate(config, std::cout);
        if (observables->parsed()) return run_observables(config, std::cout);
        if (optimize->parsed()) return run_optimize(config, std::cout);
        if (sweep->parsed()) return run_sweep(config, std::cout);
        if (critical->parsed()) return run_critical_line(config, std::cout);
        if (max_loss->parsed()) return run_max_loss(config, std::cout);
        if (qmax->parsed()) return run_qmax(config, std::cout);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
