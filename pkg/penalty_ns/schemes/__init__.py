"""Penalty-projection, direct and auxiliary time-stepping schemes."""

from penalty_ns.schemes.auxiliary import (
    deterministic_penalty_step,
    stokes_penalty_step,
)
from penalty_ns.schemes.base_scheme import (
    BlowUp,
    DecomposedState,
    PenaltyState,
    PicardDiverged,
    SchemeError,
)
from penalty_ns.schemes.direct import direct_step, stokes_direct_step
from penalty_ns.schemes.params import SchemeParams, SolverOpts
from penalty_ns.schemes.penalty import penalty_step
from penalty_ns.schemes.trajectory import TrajectoryRecord, run_trajectory

__all__ = [
    "BlowUp",
    "DecomposedState",
    "PenaltyState",
    "PicardDiverged",
    "SchemeError",
    "SchemeParams",
    "SolverOpts",
    "TrajectoryRecord",
    "deterministic_penalty_step",
    "direct_step",
    "penalty_step",
    "run_trajectory",
    "stokes_direct_step",
    "stokes_penalty_step",
]
