#pragma once

// Rate maximization over the security split, the test-round probability and
// the physical knobs (amplifier transmittance, source intensities), and the
// derived searches built on it.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "diqkd/keyrate.hpp"

namespace diqkd {

enum class Objective { finite_rate, asymptotic_rate };

std::string to_string(Objective objective);
Objective objective_from_string(const std::string& name);

struct Interval {
    double lo = 0.0;
    double hi = 1.0;
};

struct OptimizationSpec {
    Objective objective = Objective::finite_rate;

    /// Fixed values double as starting points when the variable is free.
    bool free_eps_split = true;
    double f_pa = 0.5;
    double f_ir = 0.5;
    bool free_gamma = true;
    double gamma = 1e-2;
    Interval gamma_bounds{1e-5, 0.5};

    bool free_t = true;
    Interval t_bounds{0.01, 0.995};
    bool free_intensities = true;
    Interval lambda_bounds{1e-4, 1.0};
    Interval mu_bounds{1e-4, 2.0};

    /// Points per physical variable in the initial grid.
    int grid_points = 5;
    /// Best grid points refined by coordinate descent.
    int starts = 2;
    int sweeps = 6;
    /// Line-search tolerance in the transformed coordinates.
    double tolerance = 1e-3;
    /// Extra uniformly drawn starting points (seeded).
    int random_restarts = 0;
    std::uint64_t seed = 1;
    int workers = 1;

    void validate() const;
};

/// Optimal security split and test-round probability for fixed observables.
struct ProtocolChoice {
    KeyRateResult rate;
    double f_pa = 0.5;
    double f_ir = 0.5;
};

ProtocolChoice optimize_protocol(const HeraldedObservables& obs, const SecurityTargets& targets,
                                 double n_sh, const OptimizationSpec& spec);

struct OptimizationResult {
    KeyRateResult rate;
    SetupParams setup;
    double f_pa = 0.5;
    double f_ir = 0.5;
    /// Asymptotic rate at the chosen physical parameters.
    double k_asymptotic = 0.0;
    /// Value of the search surrogate: l_raw / <N> for the finite objective,
    /// the unclamped P_SH [g(omega) - h(Q)] for the asymptotic one.
    double surrogate = 0.0;
    int evaluations = 0;

    /// K for the finite objective, K_inf for the asymptotic one.
    double rate_value(Objective objective) const;
};

OptimizationResult maximize_rate(const SetupParams& setup, const SecurityTargets& targets,
                                 double n_sh, const OptimizationSpec& spec);

struct CriticalBlocksize {
    /// Empty when even the asymptotic rate stays below the threshold.
    std::optional<double> n_sh;
    double k_at_n = 0.0;
};

/// Smallest block size (factor 1.05 resolution) with optimized K >= threshold.
CriticalBlocksize critical_blocksize(const SetupParams& setup, const SecurityTargets& targets,
                                     const OptimizationSpec& spec, double threshold = 1e-10,
                                     double n_lo = 1e4, double n_hi = 1e16);

struct CriticalLinePoint {
    double eta_cd = 1.0;
    CriticalBlocksize critical;
};

struct CriticalLineResult {
    std::string label;
    std::vector<CriticalLinePoint> points;
};

/// Critical block size for each efficiency (eta_c = eta_d) of the grid.
CriticalLineResult critical_line(const SetupParams& setup, const SecurityTargets& targets,
                                 const OptimizationSpec& spec, const std::vector<double>& eta_grid,
                                 double threshold = 1e-10, double n_lo = 1e4, double n_hi = 1e16);

struct LossConstraints {
    double threshold = 1e-10;
    /// Upper bound on <N>; non-positive disables it.
    double n_cap = 0.0;
    double resolution_db = 0.05;
    double max_db = 120.0;
};

struct MaxLossResult {
    /// Empty when the setup is infeasible already at zero loss.
    std::optional<double> loss_db;
    OptimizationResult at_max;
};

MaxLossResult max_tolerable_loss(const SetupParams& setup, const SecurityTargets& targets,
                                 double n_sh, const OptimizationSpec& spec,
                                 const LossConstraints& constraints);

struct QMaxResult {
    double q_max = 0.0;
    bool feasible_at_zero = false;
};

/// Largest double-to-single pair ratio q of the relay source (vacuum-free,
/// three bins) keeping l > 0 and <N> <= n_cap, with an ideal Alice source.
QMaxResult q_max_search(const SetupParams& setup, const SecurityTargets& targets, double n_sh,
                        const OptimizationSpec& spec, double n_cap = 1e15, double q_lo = 1e-8,
                        double q_hi = 1.0);

}  // namespace diqkd
