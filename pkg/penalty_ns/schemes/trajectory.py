"""Trajectory runner: advances a scheme over one level with diagnostics."""

from __future__ import annotations

import logging
import pathlib
from dataclasses import dataclass, field
from typing import Any, Dict, List, Mapping, Sequence, Tuple

from penalty_ns.noise.increments import (
    WienerIncrements,
    increment_field,
    to_level,
)
from penalty_ns.noise.model import NoiseModel
from penalty_ns.schemes.base_scheme import (
    BaseScheme,
    SchemeError,
    divergence_residual,
    ensure_solenoidal,
    penalty_residual,
)
from penalty_ns.schemes.checkpoint import save_checkpoint
from penalty_ns.schemes.params import SchemeParams, SolverOpts
from penalty_ns.schemes.scheme_util import setup_scheme
from penalty_ns.spectral.fields import SpectralScalar, SpectralVector
from penalty_ns.spectral.operators import norm
from penalty_ns.utils.types import StepHook

logger = logging.getLogger(__name__)

# Relative divergence of u0 tolerated without projection
_INIT_DIV_TOL = 1e-12


@dataclass(frozen=True)
class StepDiagnostics:
    """Per-step scalar diagnostics.

    The first seven fields form the trajectory CSV row. grad_tilde_sq is
    |grad u~|^2 and pressure_sq is |p|^2, used by the stability sweep.
    """

    step: int
    t: float
    energy: float
    enstrophy: float
    div_residual: float
    penalty_residual: float
    picard_iters: int
    grad_tilde_sq: float
    pressure_sq: float


def diagnose(scheme: BaseScheme, state, t: float) -> StepDiagnostics:
    """Diagnostics of state; penalty residual is 0 for unpenalized schemes."""
    u = state.u
    pen = 0.0
    if scheme.penalized and state.step > 0:
        pen = penalty_residual(state.u_tilde, state.p_tilde, scheme.params.eps)
    return StepDiagnostics(
        step=state.step,
        t=t,
        energy=norm(u) ** 2,
        enstrophy=norm(u, 1) ** 2,
        div_residual=divergence_residual(u),
        penalty_residual=pen,
        picard_iters=state.picard_iters,
        grad_tilde_sq=norm(state.u_tilde, 1) ** 2,
        pressure_sq=norm(state.p) ** 2,
    )


@dataclass
class TrajectoryRecord:
    """Diagnostics, snapshots and final state of one run.

    Attributes:
        scheme: Scheme tag.
        params: Parameters of the level.
        diagnostics: One entry per step, including the initial state.
        snapshots: Step -> (u, p), every record_every steps and at step M.
        final_state: State after the last step.
        record_every: Snapshot cadence in steps.
        coupling_key: Identifies the driving noise path (None if noise-free).
    """

    scheme: str
    params: SchemeParams
    diagnostics: List[StepDiagnostics] = field(default_factory=list)
    snapshots: Dict[int, Tuple[SpectralVector, SpectralScalar]] = field(
        default_factory=dict
    )
    final_state: object = None
    record_every: int = 1
    coupling_key: tuple | None = None

    @property
    def M(self) -> int:
        return self.params.M

    def velocity(self, step: int) -> SpectralVector:
        """Recorded velocity at step."""
        return self._snapshot(step)[0]

    def pressure(self, step: int) -> SpectralScalar:
        """Recorded pressure at step."""
        return self._snapshot(step)[1]

    def _snapshot(self, step: int) -> Tuple[SpectralVector, SpectralScalar]:
        if step not in self.snapshots:
            raise KeyError(
                f"Step {step} was not recorded (record_every="
                f"{self.record_every})!"
            )
        return self.snapshots[step]

    def rows(self) -> List[StepDiagnostics]:
        """Diagnostics in step order."""
        return sorted(self.diagnostics, key=lambda d: d.step)


def run_trajectory(
    scheme_tag: str | BaseScheme,
    params: SchemeParams,
    u0: SpectralVector,
    increments: WienerIncrements | None,
    level: int | None = None,
    opts: SolverOpts | None = None,
    hooks: Sequence[StepHook] = (),
    *,
    model: NoiseModel | None = None,
    record_every: int = 1,
    start_state=None,
    checkpoint_every: int = 0,
    checkpoint_dir: str | pathlib.Path | None = None,
    checkpoint_metadata: Mapping[str, Any] | None = None,
) -> TrajectoryRecord:
    """Advance a scheme from u0 (or start_state) to step M.

    Args:
        scheme_tag: Registered tag or a scheme object.
        params: Parameters; params.M is the number of steps.
        u0: Initial velocity. Projected with a warning if it is not
            divergence-free and the scheme needs solenoidal data.
        increments: Noise ladder at M or any multiple of it. None runs
            without noise.
        level: Number of steps of the level; must equal params.M if given.
        opts: Solver options.
        hooks: Observers called as hook(step, t, state) after every step and
            once for the starting state. They must not mutate anything.
        model: Noise model; required when increments is given.
        record_every: Keep (u, p) every this many steps (and at step M).
        start_state: Resume from this state instead of u0.
        checkpoint_every: Write a checkpoint every this many steps (0: off).
        checkpoint_dir: Directory for checkpoints.
        checkpoint_metadata: Extra entries stored with every checkpoint.

    Raises:
        SchemeError: A step failed; err.step is the failing step.
    """
    if level is not None and level != params.M:
        raise ValueError(
            f"level ({level}) must equal params.M ({params.M})!"
        )
    if record_every < 1:
        raise ValueError(
            f"record_every must be >= 1, but it is {record_every}!"
        )
    if isinstance(scheme_tag, BaseScheme):
        scheme = scheme_tag.with_params(params)
        if opts is not None:
            scheme.opts = opts
    else:
        scheme = setup_scheme(scheme_tag, params, opts)

    coupling_key = None
    level_incs = None
    if increments is not None and params.M > 0:
        if model is None:
            raise ValueError("A noise model is required with increments!")
        level_incs = to_level(increments, params.M)
        coupling_key = increments.coupling_key

    if start_state is None:
        if scheme.needs_solenoidal_init:
            u0 = ensure_solenoidal(u0, _INIT_DIV_TOL)
        state = scheme.init_state(u0)
    else:
        state = start_state
    record = TrajectoryRecord(
        scheme=scheme.tag,
        params=params,
        record_every=record_every,
        coupling_key=coupling_key,
    )
    k = params.k

    def observe(current) -> None:
        t = current.step * k
        record.diagnostics.append(diagnose(scheme, current, t))
        if current.step % record_every == 0 or current.step == params.M:
            record.snapshots[current.step] = (current.u, current.p)
        for hook in hooks:
            hook(current.step, t, current)

    observe(state)
    for ell in range(state.step + 1, params.M + 1):
        if level_incs is None:
            dW = SpectralVector.zeros(state.u.grid)
        else:
            dW = increment_field(model, level_incs, params.M, ell)
        try:
            state = scheme.step(state, dW)
        except SchemeError:
            logger.debug(
                "%s failed at step %d of %d.", scheme.tag, ell, params.M
            )
            raise
        observe(state)
        if checkpoint_dir and checkpoint_every and ell % checkpoint_every == 0:
            path = pathlib.Path(checkpoint_dir) / f"checkpoint-{ell:06d}.pnsf"
            cursor = {
                **(checkpoint_metadata or {}),
                "scheme": scheme.tag,
                "M": params.M,
                "next_step": ell + 1,
            }
            if increments is not None:
                cursor.update(
                    base_seed=increments.base_seed,
                    path_index=increments.path_index,
                    M_fine=increments.M_fine,
                )
            save_checkpoint(path, state, cursor)
    record.final_state = state
    return record
