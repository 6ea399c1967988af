#pragma once

// Scenario configuration: a YAML document with fixed sections. Unknown keys
// are rejected and every diagnostic carries the offending line.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "diqkd/optimizer.hpp"

namespace diqkd::cli {

/// Invalid configuration; maps to exit code 2.
class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct ProtocolSettings {
    double n_sh = 1e7;
    double gamma = 1e-2;
    double f_pa = 0.5;
    double f_ir = 0.5;
};

struct CriticalLineSettings {
    double threshold = 1e-10;
    double n_lo = 1e4;
    double n_hi = 1e16;
};

struct QmaxSettings {
    double n_cap = 1e15;
    double q_lo = 1e-8;
    double q_hi = 1.0;
};

struct ScenarioConfig {
    std::string name = "scenario";
    SetupParams setup;
    SecurityTargets security = security_preset("S1");
    ProtocolSettings protocol;
    bool optimize = true;
    OptimizationSpec optimization;

    /// Sweep axes; an absent axis holds the single value from setup/protocol.
    std::vector<double> loss_grid;
    /// True when grid.eta_cd was given; rows then set eta_c = eta_d.
    bool eta_sweep = false;
    std::vector<double> eta_grid;
    std::vector<double> n_grid;

    LossConstraints max_loss;
    CriticalLineSettings critical;
    QmaxSettings qmax;
    double clock_hz = 1e10;

    std::string out_dir = "out";
    int workers = 1;
    std::uint64_t seed = 1;
    std::size_t cache_size = 200000;

    /// FNV-1a 64 of the config text and the command-line overrides.
    std::uint64_t hash = 0;
};

/// Defaults used when no config file is given (p_d = 1e-7, eta_c = eta_d = 1).
ScenarioConfig default_config();

ScenarioConfig parse_config(const std::string& text, const std::string& source_name);
ScenarioConfig load_config(const std::string& path);

/// Fills empty axes and checks cross-field constraints.
void finalize(ScenarioConfig& config);

std::uint64_t fnv1a64(const std::string& data, std::uint64_t seed = 0xcbf29ce484222325ULL);

}  // namespace diqkd::cli
