from ._core import (
    Architecture,
    CheckReport,
    HeraldedObservables,
    KeyRateResult,
    Objective,
    OptimizationResult,
    OptimizationSpec,
    ProtocolParams,
    SecurityTargets,
    SetupParams,
    SourceFamily,
    SourceSpec,
    asymptotic_rate,
    delta_est_min,
    esr_cutoff_loss_db,
    esr_ideal_closed_form,
    expected_transmissions,
    g_entropy,
    heralded_observables,
    key_length,
    maximize_rate,
    pqa_ideal_closed_form,
    run_verification,
    security_preset,
    session_time,
    unassisted_ideal_closed_form,
)

__all__ = [name for name in dir() if not name.startswith("_")]
