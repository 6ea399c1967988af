#include "diqkd/keyrate.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "diqkd/numeric.hpp"

namespace diqkd {

namespace {

const double kTsirelson = (2.0 + std::numbers::sqrt2) / 4.0;

void require_unit(double x, const char* name) {
    if (!(x > 0.0 && x < 1.0)) {
        throw std::invalid_argument(std::string(name) + " must lie in (0, 1)");
    }
}

double radicand(double p) {
    if (!(p >= 0.0 && p <= kTsirelson + 1e-10)) {
        throw std::domain_error("winning probability outside [0, (2+sqrt2)/4]");
    }
    return std::max(0.0, 16.0 * p * (p - 1.0) + 3.0);
}

}  // namespace

SecurityTargets security_preset(const std::string& name) {
    if (name == "S1") return {"S1", 1e-5, 1e-10, 1e-2, 1e-6};
    if (name == "S2") return {"S2", 1e-9, 1e-15, 1e-3, 1e-10};
    throw std::invalid_argument("unknown security preset '" + name + "' (expected S1 or S2)");
}

void SecurityBudget::validate() const {
    require_unit(eps_sec, "eps_sec");
    require_unit(eps_cor, "eps_cor");
    require_unit(eps_rob, "eps_rob");
    require_unit(eps_pa, "eps_PA");
    require_unit(eps_s, "eps_s");
    require_unit(eps_ea, "eps_EA");
    require_unit(eps_ir, "eps_IR");
    require_unit(eps_ir_prime, "eps'_IR");
    require_unit(eps_rob_ea, "eps_rob^EA");
    const double slack = 1e-12;
    if (eps_pa + eps_s + eps_ea > eps_sec * (1.0 + slack)) {
        throw std::invalid_argument("eps_PA + eps_s + eps_EA exceeds eps_sec");
    }
    if (eps_ir != eps_cor) throw std::invalid_argument("eps_IR must equal eps_cor");
    if (eps_rob_ir() + eps_rob_ea + eps_ir > eps_rob * (1.0 + slack)) {
        throw std::invalid_argument("eps_rob^IR + eps_rob^EA + eps_IR exceeds eps_rob");
    }
}

SecurityBudget make_budget(const SecurityTargets& targets, double f_pa, double f_ir) {
    if (!(f_pa > 0.0 && f_pa < 1.0) || !(f_ir > 0.0 && f_ir < 1.0)) {
        throw std::invalid_argument("budget fractions must lie in (0, 1)");
    }
    if (!(targets.eps_ea > 0.0 && targets.eps_ea < targets.eps_sec)) {
        throw std::invalid_argument("eps_EA must lie in (0, eps_sec)");
    }
    SecurityBudget b;
    b.eps_sec = targets.eps_sec;
    b.eps_cor = targets.eps_cor;
    b.eps_rob = targets.eps_rob;
    b.eps_ea = targets.eps_ea;
    const double privacy = targets.eps_sec - targets.eps_ea;
    b.eps_pa = f_pa * privacy;
    b.eps_s = (1.0 - f_pa) * privacy;
    b.eps_ir = targets.eps_cor;
    const double robust = targets.eps_rob - 2.0 * b.eps_ir;
    if (!(robust > 0.0)) throw std::invalid_argument("eps_rob leaves no room beyond 2 eps_cor");
    b.eps_ir_prime = f_ir * robust;
    b.eps_rob_ea = (1.0 - f_ir) * robust;
    b.validate();
    return b;
}

double g_entropy(double p) {
    const double s = std::sqrt(radicand(p));
    return 1.0 - binary_entropy(0.5 + 0.5 * std::min(s, 1.0));
}

double g_derivative(double p) {
    const double s = std::sqrt(radicand(p));
    if (s >= 1.0) return std::numeric_limits<double>::infinity();
    // log2(x/(1-x)) with x = (1+s)/2 equals 2 atanh(s)/ln 2; atanh(s)/s -> 1.
    const double ratio = s < 1e-8 ? 1.0 : std::atanh(s) / s;
    return 2.0 * ratio * (8.0 * p - 4.0) / std::numbers::ln2;
}

double f_min(double p, double p_t) {
    if (p < p_t) return g_entropy(p);
    return g_entropy(p_t) + g_derivative(p_t) * (p - p_t);
}

double eta_function(double p, double p_t, double n_sh, double gamma, double eps1, double eps2) {
    const double corr = 2.0 / std::sqrt(n_sh) * (std::log2(13.0) + g_derivative(p_t) / gamma) *
                        std::sqrt(1.0 - 2.0 * (std::log2(eps1) + std::log2(eps2)));
    return f_min(p, p_t) - corr;
}

EtaOptResult eta_opt(double omega_sh, double n_sh, double gamma, double delta_est, double eps1,
                     double eps2) {
    if (!(n_sh > 0.0)) throw std::invalid_argument("n_sh must be positive");
    if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("gamma must lie in (0, 1)");
    require_unit(eps1, "eps1");
    require_unit(eps2, "eps2");
    EtaOptResult out;
    out.p_eval = std::min(omega_sh, kTsirelson) - delta_est / gamma;
    if (out.p_eval <= 0.75) {
        out.no_violation = true;
        return out;
    }
    const double p = out.p_eval;
    auto objective = [&](double p_t) { return eta_function(p, p_t, n_sh, gamma, eps1, eps2); };
    ScalarOptimum best = golden_section_max_multi(objective, 0.75 + 1e-9, kTsirelson - 1e-9,
                                                  1e-10, 3);
    out.value = best.value;
    out.p_t = best.x;
    return out;
}

double leak_ir(double q_sh, double omega_sh, double n_sh, double gamma, double eps_ir,
               double eps_ir_prime) {
    const double e2 = eps_ir_prime * eps_ir_prime;
    return n_sh * ((1.0 - gamma) * binary_entropy(q_sh) + gamma * binary_entropy(omega_sh)) +
           4.0 * std::sqrt(n_sh) * std::log2(2.0 * std::numbers::sqrt2 + 1.0) *
               std::sqrt(2.0 * std::log2(8.0 / e2)) +
           std::log2(8.0 / e2 + 2.0 / (2.0 - eps_ir_prime)) + std::log2(1.0 / eps_ir);
}

double delta_est_min(double n_sh, double eps_rob_ea) {
    if (!(n_sh > 0.0) || !(eps_rob_ea > 0.0 && eps_rob_ea <= 1.0)) {
        throw std::invalid_argument("delta_est_min needs n > 0 and eps in (0, 1]");
    }
    return std::sqrt(std::log(1.0 / eps_rob_ea) / (2.0 * n_sh));
}

KeyRateResult key_length(const HeraldedObservables& obs, const ProtocolParams& proto,
                         const SecurityBudget& budget) {
    budget.validate();
    if (!(proto.n_sh > 0.0)) throw std::invalid_argument("n_sh must be positive");
    if (!(proto.gamma > 0.0 && proto.gamma < 1.0)) {
        throw std::invalid_argument("gamma must lie in (0, 1)");
    }
    if (proto.delta_est < delta_est_min(proto.n_sh, budget.eps_rob_ea) * (1.0 - 1e-12)) {
        throw std::invalid_argument("delta_est is below the Hoeffding minimum");
    }
    KeyRateResult r;
    r.observables = obs;
    r.protocol = proto;
    r.budget = budget;
    r.n_expected = expected_transmissions(proto.n_sh, obs.p_sh);
    if (!obs.feasible) {
        r.l_raw = -std::numeric_limits<double>::infinity();
        return r;
    }
    const double n = proto.n_sh;
    const double eps1 = budget.eps_s / 4.0;
    const EtaOptResult eo =
        eta_opt(obs.omega_sh, n, proto.gamma, proto.delta_est, eps1, budget.eps_ea + budget.eps_ir);
    r.eta_opt = eo.value;
    r.leak = leak_ir(obs.q_sh, obs.omega_sh, n, proto.gamma, budget.eps_ir, budget.eps_ir_prime);
    // 1 - sqrt(1 - x^2) evaluated as x^2 / (1 + sqrt(1 - x^2)).
    const double smooth = eps1 * eps1 / (1.0 + std::sqrt(1.0 - eps1 * eps1));
    r.l_raw = n * (eo.value - proto.gamma) -
              2.0 * std::log2(7.0) *
                  std::sqrt(1.0 - 2.0 * std::log2(eps1 * (budget.eps_ea + budget.eps_ir))) *
                  std::sqrt(n) -
              r.leak - 3.0 * std::log2(smooth) - 2.0 * std::log2(1.0 / budget.eps_pa);
    r.feasible = !eo.no_violation && r.l_raw > 0.0;
    r.l = r.feasible ? r.l_raw : 0.0;
    r.k_cond = r.l / n;
    r.k = std::isfinite(r.n_expected) ? r.l / r.n_expected : 0.0;
    return r;
}

double asymptotic_rate(const HeraldedObservables& obs) {
    if (!obs.feasible) return 0.0;
    const double v = g_entropy(std::min(obs.omega_sh, kTsirelson)) - binary_entropy(obs.q_sh);
    return std::max(0.0, obs.p_sh * v);
}

}  // namespace diqkd
