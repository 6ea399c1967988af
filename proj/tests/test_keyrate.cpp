#include <cmath>
#include <stdexcept>

#include "diqkd/keyrate.hpp"
#include "doctest.h"

using namespace diqkd;

// Reference values from tests/oracles/keyrate_oracle.py (mpmath, 50 digits).

TEST_CASE("g and its derivative match the high-precision oracle") {
    CHECK(g_entropy(0.8) == doctest::Approx(0.34611243579453872).epsilon(1e-13));
    CHECK(g_derivative(0.8) == doctest::Approx(8.3385062143974438).epsilon(1e-11));
    CHECK(g_entropy((2.0 + std::sqrt(2.0)) / 4.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(g_entropy(0.75) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(g_entropy(0.6) == 0.0);
    CHECK_THROWS_AS(g_entropy(0.9), std::domain_error);
}

TEST_CASE("g derivative agrees with a finite difference") {
    for (double p : {0.76, 0.8, 0.84}) {
        const double h = 1e-6;
        const double fd = (g_entropy(p + h) - g_entropy(p - h)) / (2 * h);
        CHECK(g_derivative(p) == doctest::Approx(fd).epsilon(1e-6));
    }
}

TEST_CASE("Hoeffding estimation width") {
    CHECK(delta_est_min(1e10, 1e-3) == doctest::Approx(1.8584610944249192e-5).epsilon(1e-14));
    CHECK(delta_est_min(1e7, 1e-2) == doctest::Approx(0.00047985259121880812).epsilon(1e-14));
}

TEST_CASE("eta_opt matches the oracle at an interior optimum") {
    const double d = delta_est_min(1e11, 1e-3);
    EtaOptResult r = eta_opt(0.85, 1e11, 5e-3, d, 1e-8, 1e-8);
    CHECK_FALSE(r.no_violation);
    CHECK(r.value == doctest::Approx(0.70554475659522746).epsilon(1e-9));
    CHECK(r.p_t == doctest::Approx(0.83572183078).epsilon(1e-5));
}

TEST_CASE("eta_opt matches the oracle when the optimum sits at 3/4") {
    const double d = delta_est_min(1e10, 1e-3);
    EtaOptResult r = eta_opt(0.84, 1e10, 1e-3, d, 1e-8, 1e-8);
    CHECK(r.value == doctest::Approx(-0.78419434532274995).epsilon(1e-7));
    CHECK(r.p_t == doctest::Approx(0.75).epsilon(1e-6));
}

TEST_CASE("eta_opt reports no violation below 3/4") {
    EtaOptResult r = eta_opt(0.75, 1e8, 1e-2, 1e-4, 1e-8, 1e-8);
    CHECK(r.no_violation);
    CHECK(r.value == 0.0);
}

TEST_CASE("leak_ir matches the oracle") {
    CHECK(leak_ir(0.01, 0.85, 1e9, 0.01, 1e-10, 1e-2) ==
          doctest::Approx(87481888.33463705).epsilon(1e-13));
}

TEST_CASE("budget construction respects the composition bounds") {
    for (const char* name : {"S1", "S2"}) {
        SecurityTargets t = security_preset(name);
        for (double f : {0.01, 0.5, 0.99}) {
            SecurityBudget b = make_budget(t, f, 1.0 - f);
            CHECK(b.eps_pa + b.eps_s + b.eps_ea <= t.eps_sec * (1 + 1e-12));
            CHECK(b.eps_rob_ir() + b.eps_rob_ea + b.eps_ir <= t.eps_rob * (1 + 1e-12));
            CHECK(b.eps_ir == t.eps_cor);
        }
    }
    CHECK_THROWS_AS(security_preset("S3"), std::invalid_argument);
    CHECK_THROWS_AS(make_budget(security_preset("S1"), 0.0, 0.5), std::invalid_argument);
}

TEST_CASE("key length of a perfect relay") {
    HeraldedObservables obs = esr_ideal_closed_form(1.0);
    SecurityBudget b = make_budget(security_preset("S1"), 0.5, 0.5);
    ProtocolParams p{1e9, 1e-2, delta_est_min(1e9, b.eps_rob_ea)};
    KeyRateResult r = key_length(obs, p, b);
    CHECK(r.feasible);
    CHECK(r.l > 0.2 * p.n_sh);
    CHECK(r.l < p.n_sh);
    CHECK(r.k == doctest::Approx(r.l * obs.p_sh / p.n_sh).epsilon(1e-12));
    CHECK(r.k_cond == doctest::Approx(r.l / p.n_sh));
}

TEST_CASE("key length clamps and reports infeasible points") {
    HeraldedObservables obs = esr_ideal_closed_form(0.8);
    SecurityBudget b = make_budget(security_preset("S1"), 0.5, 0.5);
    ProtocolParams p{1e6, 1e-2, delta_est_min(1e6, b.eps_rob_ea)};
    KeyRateResult r = key_length(obs, p, b);
    CHECK_FALSE(r.feasible);
    CHECK(r.l == 0.0);
    CHECK(r.k == 0.0);
    CHECK(r.l_raw < 0.0);
    p.delta_est *= 0.5;
    CHECK_THROWS_AS(key_length(obs, p, b), std::invalid_argument);
}

TEST_CASE("asymptotic rate") {
    HeraldedObservables obs = esr_ideal_closed_form(1.0);
    CHECK(asymptotic_rate(obs) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(asymptotic_rate(esr_ideal_closed_form(0.8)) == 0.0);
}
