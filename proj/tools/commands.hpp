#pragma once

// Subcommands of the sweep tool. Each returns the process exit code:
// 0 success, 1 check failure, 2 configuration error.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "config.hpp"

namespace diqkd::cli {

inline constexpr const char* kToolVersion = "0.1.0";

struct Overrides {
    std::optional<std::string> config_path;
    std::optional<std::string> out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<int> workers;
    std::optional<std::string> preset;
};

/// Loads the config (or the defaults), applies overrides and finalizes it.
/// Throws ConfigError.
ScenarioConfig resolve_config(const Overrides& overrides);

int run_rate(const ScenarioConfig& config, std::ostream& out);
int run_observables(const ScenarioConfig& config, std::ostream& out);
int run_optimize(const ScenarioConfig& config, std::ostream& out);
int run_sweep(const ScenarioConfig& config, std::ostream& out);
int run_critical_line(const ScenarioConfig& config, std::ostream& out);
int run_max_loss(const ScenarioConfig& config, std::ostream& out);
int run_qmax(const ScenarioConfig& config, std::ostream& out);
int run_verify(const std::string& scope, std::ostream& out);
int run_session_time(double n_expected, double clock_hz, std::ostream& out);

/// Fixed-width "%.12e" rendering used for every CSV number.
std::string format_number(double value);

}  // namespace diqkd::cli
