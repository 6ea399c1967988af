#pragma once

// Finite-key secret key length, asymptotic rate and the security budget.
// All logarithms are base 2.

#include <string>

#include "diqkd/observables.hpp"

namespace diqkd {

/// Target security parameters of a named set, plus the fixed entropy
/// accumulation failure probability used with it.
struct SecurityTargets {
    std::string label;
    double eps_sec = 1e-5;
    double eps_cor = 1e-10;
    double eps_rob = 1e-2;
    double eps_ea = 1e-6;
};

/// "S1" = (1e-5, 1e-10, 1e-2) with eps_EA = 1e-6;
/// "S2" = (1e-9, 1e-15, 1e-3) with eps_EA = 1e-10.
SecurityTargets security_preset(const std::string& name);

struct SecurityBudget {
    double eps_sec = 0.0;
    double eps_cor = 0.0;
    double eps_rob = 0.0;
    double eps_pa = 0.0;
    double eps_s = 0.0;
    double eps_ea = 0.0;
    double eps_ir = 0.0;
    double eps_ir_prime = 0.0;
    double eps_rob_ea = 0.0;

    double eps_rob_ir() const { return eps_ir_prime + eps_ir; }
    /// Throws std::invalid_argument when a component leaves (0,1) or a
    /// composition bound is violated.
    void validate() const;
};

/// Splits the targets by construction: eps_PA = f_pa (eps_sec - eps_EA),
/// eps_s = (1 - f_pa)(eps_sec - eps_EA), eps_IR = eps_cor,
/// eps'_IR = f_ir R and eps_rob^EA = (1 - f_ir) R with R = eps_rob - 2 eps_IR.
SecurityBudget make_budget(const SecurityTargets& targets, double f_pa, double f_ir);

struct ProtocolParams {
    double n_sh = 1e7;
    double gamma = 1e-2;
    double delta_est = 0.0;
};

/// 1 - h(1/2 + sqrt(16 p (p-1) + 3)/2). A negative radicand (p between 1/4
/// and 3/4) is clamped to zero, giving g = 0.
double g_entropy(double p);
double g_derivative(double p);
double f_min(double p, double p_t);
double eta_function(double p, double p_t, double n_sh, double gamma, double eps1, double eps2);

struct EtaOptResult {
    double value = 0.0;
    double p_t = 0.0;
    /// Evaluation point omega - delta/gamma; at or below 3/4 the result is
    /// 0 and `no_violation` is set.
    double p_eval = 0.0;
    bool no_violation = false;
};

EtaOptResult eta_opt(double omega_sh, double n_sh, double gamma, double delta_est, double eps1,
                     double eps2);

double leak_ir(double q_sh, double omega_sh, double n_sh, double gamma, double eps_ir,
               double eps_ir_prime);

/// sqrt(ln(1/eps) / (2 n)).
double delta_est_min(double n_sh, double eps_rob_ea);

struct KeyRateResult {
    /// Clamped key length max(0, l_raw).
    double l = 0.0;
    double l_raw = 0.0;
    double k_cond = 0.0;
    double k = 0.0;
    double n_expected = 0.0;
    double eta_opt = 0.0;
    double leak = 0.0;
    HeraldedObservables observables;
    ProtocolParams protocol;
    SecurityBudget budget;
    bool feasible = false;
};

KeyRateResult key_length(const HeraldedObservables& obs, const ProtocolParams& proto,
                         const SecurityBudget& budget);

/// P_SH [g(omega) - h(Q)] clamped at zero.
double asymptotic_rate(const HeraldedObservables& obs);

}  // namespace diqkd
