"""Error functionals, Monte Carlo studies and rate estimation."""

from penalty_ns.experiments.errors import (
    CouplingError,
    ErrorRecord,
    ErrorReport,
    compute_error_functionals,
    compute_error_record,
)
from penalty_ns.experiments.probability import (
    MissingDiagnosticsError,
    SampleSetStats,
    SampleSetThresholds,
    estimate_exceedance,
    sample_set_membership,
)
from penalty_ns.experiments.rates import RateFit, RateFitError, fit_rate
from penalty_ns.experiments.study import (
    run_decomposition_check,
    run_mc_study,
    run_noise_check,
    run_simulation,
    run_stability_sweep,
    run_z_study,
)
from penalty_ns.experiments.taylor_green import run_taylor_green

__all__ = [
    "CouplingError",
    "ErrorRecord",
    "ErrorReport",
    "MissingDiagnosticsError",
    "RateFit",
    "RateFitError",
    "SampleSetStats",
    "SampleSetThresholds",
    "compute_error_functionals",
    "compute_error_record",
    "estimate_exceedance",
    "fit_rate",
    "run_decomposition_check",
    "run_mc_study",
    "run_noise_check",
    "run_simulation",
    "run_stability_sweep",
    "run_taylor_green",
    "run_z_study",
    "sample_set_membership",
]
