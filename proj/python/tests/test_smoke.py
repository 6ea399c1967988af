import math

import pytest

import diqkd


def relay(eta=1.0, loss_db=0.0, p_d=0.0):
    s = diqkd.SetupParams()
    s.arch = diqkd.Architecture.esr
    s.eta_c = s.eta_d = eta
    s.loss_db = loss_db
    s.p_d = p_d
    return s


def test_pipeline_matches_closed_form():
    obs = diqkd.heralded_observables(relay(eta=0.98))
    ref = diqkd.esr_ideal_closed_form(0.98**2)
    assert obs.feasible
    assert obs.p_sh == pytest.approx(ref.p_sh, rel=1e-9)
    assert obs.omega_sh == pytest.approx(ref.omega_sh, abs=1e-9)
    assert obs.q_sh == pytest.approx(ref.q_sh, abs=1e-9)


def test_perfect_relay_reaches_tsirelson():
    obs = diqkd.heralded_observables(relay())
    assert obs.omega_sh == pytest.approx((2 + math.sqrt(2)) / 4, abs=1e-12)
    assert obs.q_sh == pytest.approx(0.0, abs=1e-12)
    assert diqkd.asymptotic_rate(obs) == pytest.approx(obs.p_sh, rel=1e-9)


def test_invalid_setup_raises():
    s = relay()
    s.eta_c = 1.5
    with pytest.raises(ValueError):
        diqkd.heralded_observables(s)


def test_key_length_and_budget():
    obs = diqkd.heralded_observables(relay(eta=0.99, loss_db=10.0, p_d=1e-7))
    proto = diqkd.ProtocolParams()
    proto.n_sh = 1e10
    proto.gamma = 1e-2
    proto.delta_est = diqkd.delta_est_min(1e10, 0.4e-2)
    r = diqkd.key_length(obs, proto, diqkd.security_preset("S1"))
    assert r.feasible
    assert r.l == max(0.0, r.l_raw)
    assert r.n_expected == pytest.approx(diqkd.expected_transmissions(1e10, obs.p_sh))


def test_optimizer_is_deterministic():
    spec = diqkd.OptimizationSpec()
    spec.random_restarts = 1
    a = diqkd.maximize_rate(relay(loss_db=20.0, p_d=1e-7), diqkd.security_preset("S1"), 1e9, spec)
    b = diqkd.maximize_rate(relay(loss_db=20.0, p_d=1e-7), diqkd.security_preset("S1"), 1e9, spec)
    assert a.rate.k > 0
    assert a.rate.k == b.rate.k
    assert a.rate.k <= a.k_asymptotic


def test_cutoff_and_session_time():
    assert diqkd.esr_cutoff_loss_db(1e7, 1.0) == pytest.approx(76.99, abs=0.01)
    assert diqkd.session_time(1e10, 1e10) == pytest.approx(1.0)


def test_verification_scope():
    reports = diqkd.run_verification("closed-form")
    assert reports and all(r.passed for r in reports)
