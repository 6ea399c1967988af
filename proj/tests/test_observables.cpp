#include <cmath>
#include <numbers>
#include <stdexcept>

#include "diqkd/observables.hpp"
#include "doctest.h"

using namespace diqkd;

namespace {

SetupParams ideal_setup(Architecture arch, double xi) {
    SetupParams s;
    s.arch = arch;
    s.eta_c = s.eta_d = std::sqrt(xi);
    s.t = 0.7;
    return s;
}

void check_close(const HeraldedObservables& got, const HeraldedObservables& want, double tol) {
    CHECK(got.feasible);
    CHECK(got.p_sh == doctest::Approx(want.p_sh).epsilon(tol));
    CHECK(got.omega_sh == doctest::Approx(want.omega_sh).epsilon(tol));
    CHECK(std::fabs(got.q_sh - want.q_sh) < tol);
}

}  // namespace

TEST_CASE("relay amplifier pipeline reproduces its ideal closed form") {
    for (double xi : {1.0, 0.95, 0.9, 0.81, 0.5}) {
        INFO("xi = " << xi);
        check_close(heralded_observables(ideal_setup(Architecture::esr, xi)),
                    esr_ideal_closed_form(xi), 1e-12);
    }
    HeraldedObservables o = esr_ideal_closed_form(1.0);
    CHECK(o.p_sh == 0.5);
    CHECK(o.omega_sh == doctest::Approx(0.853553390593).epsilon(1e-12));
    CHECK(o.q_sh == 0.0);
    CHECK(o.s_sh == doctest::Approx(2.0 * std::numbers::sqrt2).epsilon(1e-12));
}

TEST_CASE("polarization amplifier pipeline reproduces its ideal closed form") {
    for (double xi : {1.0, 0.9, 0.7}) {
        for (double t : {0.3, 0.7, 0.95}) {
            INFO("xi = " << xi << ", t = " << t);
            SetupParams s = ideal_setup(Architecture::pqa, xi);
            s.t = t;
            check_close(heralded_observables(s), pqa_ideal_closed_form(xi, t), 1e-12);
        }
    }
    HeraldedObservables o = pqa_ideal_closed_form(0.9, 0.7);
    CHECK(o.p_sh == doctest::Approx(0.17739).epsilon(1e-12));
    CHECK(o.omega_sh == doctest::Approx(0.778033934885).epsilon(1e-11));
    CHECK(o.q_sh == doctest::Approx(0.104794520548).epsilon(1e-11));
}

TEST_CASE("unassisted pipeline reproduces its ideal closed form") {
    for (double loss : {0.0, 0.5, 3.0}) {
        SetupParams s;
        s.arch = Architecture::unassisted;
        s.loss_db = loss;
        check_close(heralded_observables(s), unassisted_ideal_closed_form(s.eta_ch()), 1e-12);
    }
    SetupParams lossy;
    lossy.arch = Architecture::unassisted;
    lossy.eta_c = 0.9;
    CHECK_THROWS_AS(heralded_observables(lossy), std::invalid_argument);
}

TEST_CASE("two relay amplifiers reach the Tsirelson bound when lossless") {
    HeraldedObservables o = heralded_observables(ideal_setup(Architecture::two_esr, 1.0));
    CHECK(o.s_sh == doctest::Approx(2.0 * std::numbers::sqrt2).epsilon(1e-10));
    CHECK(o.q_sh == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(o.p_sh > 0.0);
}

TEST_CASE("conditional observables of ideal relays do not depend on channel loss") {
    SetupParams s = ideal_setup(Architecture::esr, 0.9);
    HeraldedObservables base = heralded_observables(s);
    s.loss_db = 30.0;
    HeraldedObservables lossy = heralded_observables(s);
    CHECK(lossy.omega_sh == doctest::Approx(base.omega_sh).epsilon(1e-12));
    CHECK(lossy.q_sh == doctest::Approx(base.q_sh).epsilon(1e-12));
    CHECK(lossy.p_sh == doctest::Approx(base.p_sh * 1e-3).epsilon(1e-10));
}

TEST_CASE("dark counts degrade the conditional statistics") {
    SetupParams s = ideal_setup(Architecture::esr, 1.0);
    s.loss_db = 40.0;
    HeraldedObservables clean = heralded_observables(s);
    s.p_d = 1e-6;
    HeraldedObservables noisy = heralded_observables(s);
    CHECK(noisy.p_sh > clean.p_sh);
    CHECK(noisy.q_sh > clean.q_sh);
    CHECK(noisy.omega_sh < clean.omega_sh);
}

TEST_CASE("first-order transmission counts track the full model") {
    const double eta = 0.95, loss = 20.0, pd = 1e-6, n = 1e8;
    SetupParams s = ideal_setup(Architecture::esr, eta * eta);
    s.loss_db = loss;
    s.p_d = pd;
    const double full = expected_transmissions(n, heralded_observables(s).p_sh);
    CHECK(esr_expected_transmissions(n, eta, s.eta_ch(), pd) == doctest::Approx(full).epsilon(1e-3));

    s.arch = Architecture::pqa;
    const double full_pqa = expected_transmissions(n, heralded_observables(s).p_sh);
    CHECK(pqa_expected_transmissions(n, eta, s.eta_ch(), pd, s.t) ==
          doctest::Approx(full_pqa).epsilon(1e-3));
}

TEST_CASE("transmission helpers") {
    CHECK(std::isinf(expected_transmissions(1e6, 0.0)));
    CHECK(expected_transmissions(1e6, 0.5) == 2e6);
    CHECK(esr_cutoff_loss_db(1e7, 1.0) == doctest::Approx(150.0 - 10.0 * std::log10(2e7)));
    CHECK(session_time(1e12, 1e9) == doctest::Approx(1e3));
    CHECK(session_time(1e12, INFINITY) == 0.0);
    CHECK_THROWS_AS(session_time(1e12, 0.0), std::invalid_argument);
}

TEST_CASE("setup validation") {
    SetupParams s;
    s.p_d = 0.5;
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
    s.p_d = 0.0;
    s.loss_db = -1.0;
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
    s.loss_db = 0.0;
    s.arch = Architecture::pqa;
    s.t = 1.0;
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
}
