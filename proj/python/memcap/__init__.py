"""Echo state network dynamics and memory capacity estimation."""
from ._core import (
    Activation,
    CapacityProfile,
    NumericalError,
    RegimeThresholds,
    ReservoirSpec,
    SigmaRow,
    SweepResult,
    Trajectory,
    __version__,
    classify_regime,
    compute_thresholds,
    estimate_mc_tau,
    estimate_total_mc,
    linear_mc_oracle,
    run,
    run_sweep,
    sample_reservoir,
    solve_lyapunov,
    spectral_norm,
)

__all__ = [
    "Activation",
    "CapacityProfile",
    "NumericalError",
    "RegimeThresholds",
    "ReservoirSpec",
    "SigmaRow",
    "SweepResult",
    "Trajectory",
    "classify_regime",
    "compute_thresholds",
    "estimate_mc_tau",
    "estimate_total_mc",
    "linear_mc_oracle",
    "run",
    "run_sweep",
    "sample_reservoir",
    "solve_lyapunov",
    "spectral_norm",
]
