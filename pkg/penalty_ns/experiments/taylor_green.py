"""Deterministic Taylor-Green validation of the direct scheme.

With zero noise the Taylor-Green vortex stays a pure mode: its advection is
a gradient absorbed by the pressure. Implicit Euler then gives the amplitude
recursion a_l = a_(l-1) / (1 + 2 nu k kappa^2), kappa = 2 pi / L, against the
exact decay a exp(-2 nu kappa^2 t).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Sequence

from penalty_ns.experiments.rates import RateFit, fit_rate
from penalty_ns.experiments.study import setup_grid
from penalty_ns.schemes.params import SchemeParams, SolverOpts
from penalty_ns.schemes.trajectory import run_trajectory
from penalty_ns.spectral.operators import (
    norm,
    taylor_green,
    taylor_green_pressure,
)
from penalty_ns.utils.types import ConfigDict

logger = logging.getLogger(__name__)

# Accepted deviation of the fitted temporal order from 1
ORDER_TOL = 0.15
# Relative tolerance of the recursion and pressure oracles
ORACLE_TOL = 1e-8


@dataclass(frozen=True)
class TaylorGreenLevel:
    """Errors of one level against the analytic oracles.

    Attributes:
        level: Number of steps.
        k: Step size.
        exact_error: max_l |u^l - u_exact(t_l)|.
        recursion_error: max_l |u^l - a_l TG| / |a_l TG|.
        pressure_error: max_l |p^l - p_TG(a_l)| / |p_TG(a_l)|.
    """

    level: int
    k: float
    exact_error: float
    recursion_error: float
    pressure_error: float

    def as_row(self) -> Dict[str, object]:
        return {
            "level": self.level,
            "k": self.k,
            "exact_error": self.exact_error,
            "recursion_error": self.recursion_error,
            "pressure_error": self.pressure_error,
        }


@dataclass(frozen=True)
class TaylorGreenResult:
    levels: List[TaylorGreenLevel]
    rate: RateFit

    @property
    def passed(self) -> bool:
        oracles_ok = all(
            lvl.recursion_error <= ORACLE_TOL
            and lvl.pressure_error <= ORACLE_TOL
            for lvl in self.levels
        )
        return oracles_ok and abs(self.rate.slope - 1.0) <= ORDER_TOL


def run_taylor_green(
    config: ConfigDict,
    levels: Sequence[int] | None = None,
) -> TaylorGreenResult:
    """Run the direct scheme from Taylor-Green data at several step sizes.

    Args:
        config: Run config; grid, scheme and simulate.init_amplitude are used.
        levels: Step counts; defaults to study.levels.
    """
    grid = setup_grid(config)
    params = SchemeParams.from_config(config)
    opts = SolverOpts.from_config(config)
    amplitude = config["simulate"]["init_amplitude"]
    if levels is None:
        levels = config["study"]["levels"]
    levels = sorted(levels)
    rate_decay = 2 * params.nu * grid.base_wavenumber**2
    tg = taylor_green(grid, 1.0)
    tg_p = taylor_green_pressure(grid, 1.0)
    u0 = tg * amplitude

    results = []
    for M in levels:
        level_params = params.at_level(M)
        k = level_params.k
        traj = run_trajectory("direct", level_params, u0, None, opts=opts)
        exact_error = 0.0
        recursion_error = 0.0
        pressure_error = 0.0
        a_ell = amplitude
        for ell in range(1, M + 1):
            a_ell = a_ell / (1 + rate_decay * k)
            u = traj.velocity(ell)
            exact = tg * (amplitude * math.exp(-rate_decay * ell * k))
            exact_error = max(exact_error, norm(u - exact))
            discrete = tg * a_ell
            recursion_error = max(
                recursion_error, norm(u - discrete) / norm(discrete)
            )
            p_oracle = tg_p * a_ell**2
            pressure_error = max(
                pressure_error,
                norm(traj.pressure(ell) - p_oracle) / norm(p_oracle),
            )
        logger.info(
            "M=%d: exact error %.3e, recursion %.3e, pressure %.3e.",
            M,
            exact_error,
            recursion_error,
            pressure_error,
        )
        results.append(
            TaylorGreenLevel(
                level=M,
                k=k,
                exact_error=exact_error,
                recursion_error=recursion_error,
                pressure_error=pressure_error,
            )
        )
    rate = fit_rate(
        [r.k for r in results],
        [r.exact_error for r in results],
        response="taylor_green_error",
    )
    logger.info("Taylor-Green temporal order %.4f.", rate.slope)
    return TaylorGreenResult(levels=results, rate=rate)
