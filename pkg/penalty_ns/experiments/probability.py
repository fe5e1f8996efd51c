"""Exceedance probabilities and sample-set diagnostics.

The sample sets of one path at step size k are

    Omega_1: sup_t |u(t)|_1^2 + k sum_l |u(t_l)|_1^2 <= kappa_1
    Omega_2: z-scheme error functional <= kappa_2
    Omega_3: |u(t_l) - u(t_(l-1))|_L4^2 <= kappa_3 k^(2 eta) for every l

with u the reference solution. Omega_3 is checked on adjacent coarse time
pairs only, and the supremum in Omega_1 runs over the recorded reference
times.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Sequence

import numpy as np
import scipy.stats

from penalty_ns.experiments.errors import ErrorRecord, ErrorReport
from penalty_ns.schemes.trajectory import TrajectoryRecord
from penalty_ns.spectral.operators import norm

logger = logging.getLogger(__name__)

CONFIDENCE = 0.95


class MissingDiagnosticsError(KeyError):
    """A quantity needed for the sample sets was not recorded."""


# =========================================================================== #
#                                 Exceedance                                  #
# =========================================================================== #


def wilson_half_width(
    successes: int, trials: int, confidence: float = CONFIDENCE
) -> float:
    """Half-width of the Wilson score interval of a binomial fraction."""
    if trials < 1:
        return math.nan
    z = float(scipy.stats.norm.ppf(0.5 + confidence / 2))
    p = successes / trials
    denom = 1 + z**2 / trials
    spread = p * (1 - p) / trials + z**2 / (4 * trials**2)
    return z * math.sqrt(spread) / denom


@dataclass(frozen=True)
class Exceedance:
    """Empirical P[E^M >= C k^r] at one level."""

    level: int
    k: float
    C: float
    r: float
    fraction: float
    ci_half_width: float
    exceed_count: int
    blow_ups: int
    paths: int

    def as_row(self) -> Dict[str, object]:
        """Row of exceedance.csv."""
        return {
            "level": self.level,
            "k": self.k,
            "C": self.C,
            "r": self.r,
            "fraction": self.fraction,
            "ci_half_width": self.ci_half_width,
        }


def exceeds(values: np.ndarray, blew_up: np.ndarray, threshold: float):
    """Per-path exceedance flags; blow-ups always exceed."""
    return blew_up | (values >= threshold)


def estimate_exceedance(
    reports: Sequence[ErrorReport], C: float, r: float
) -> List[Exceedance]:
    """Fraction of paths with E^M >= C k^r per level, with a 95% half-width.

    Paths that blew up are counted as exceedances.
    """
    results = []
    for report in reports:
        if not report.records:
            raise ValueError(f"Level {report.level} has no paths!")
        threshold = C * report.k**r if math.isfinite(C) else math.inf
        flags = exceeds(report.values("em"), report.blew_up, threshold)
        count = int(flags.sum())
        n = len(flags)
        results.append(
            Exceedance(
                level=report.level,
                k=report.k,
                C=C,
                r=r,
                fraction=count / n,
                ci_half_width=wilson_half_width(count, n),
                exceed_count=count,
                blow_ups=int(report.blew_up.sum()),
                paths=n,
            )
        )
    return results


def median_threshold(report: ErrorReport) -> float:
    """Empirical median of E^M at a level (blow-ups included as +inf)."""
    return float(np.median(report.values("em")))


# =========================================================================== #
#                                Sample sets                                  #
# =========================================================================== #


@dataclass(frozen=True)
class SampleSetThresholds:
    """Thresholds kappa_1, kappa_2, kappa_3."""

    kappa1: float
    kappa2: float
    kappa3: float


@dataclass(frozen=True)
class SampleQuantities:
    """Per-path quantities compared against the thresholds."""

    path: int
    q1: float
    q2: float
    q3: float


@dataclass(frozen=True)
class SampleSetStats:
    """Membership of each path and complement probabilities.

    Attributes:
        level: Number of steps of the level.
        k: Step size.
        thresholds: Thresholds used.
        in1, in2, in3: Per-path membership in Omega_1, Omega_2, Omega_3.
        complement: Empirical P(Omega minus Omega_i), i = 1, 2, 3.
        conditional: Exceedance fraction among paths in all three sets
            (nan if there are none or no exceedance flags were given).
        bound: sum of complements plus the conditional fraction.
    """

    level: int
    k: float
    thresholds: SampleSetThresholds
    in1: np.ndarray
    in2: np.ndarray
    in3: np.ndarray
    complement: tuple
    conditional: float
    bound: float

    def as_row(self) -> Dict[str, object]:
        """Row of sample_sets.csv."""
        return {
            "level": self.level,
            "k": self.k,
            "kappa1": self.thresholds.kappa1,
            "kappa2": self.thresholds.kappa2,
            "kappa3": self.thresholds.kappa3,
            "p_out1": self.complement[0],
            "p_out2": self.complement[1],
            "p_out3": self.complement[2],
            "conditional": self.conditional,
            "bound": self.bound,
        }


def sample_set_quantities(
    traj_ref: TrajectoryRecord,
    z_error: ErrorRecord | float,
    level: int,
    eta: float,
    path: int = 0,
) -> SampleQuantities:
    """Quantities of one path at a level with `level` steps.

    Raises:
        MissingDiagnosticsError: The reference lacks a snapshot at a coarse
            time of the level.
    """
    if level < 1 or traj_ref.M % level != 0:
        raise ValueError(
            f"Level {level} does not divide the reference M={traj_ref.M}!"
        )
    ratio = traj_ref.M // level
    k = traj_ref.params.T / level
    try:
        coarse = [traj_ref.velocity(ell * ratio) for ell in range(level + 1)]
    except KeyError as err:
        raise MissingDiagnosticsError(
            f"Reference velocity missing for level {level}: {err}"
        ) from err
    sup_h1 = max(norm(u, 1) ** 2 for u, _ in traj_ref.snapshots.values())
    q1 = sup_h1 + k * sum(norm(u, 1) ** 2 for u in coarse[1:])
    if isinstance(z_error, ErrorRecord):
        q2 = z_error.em
    else:
        q2 = float(z_error)
    increments = [
        norm(coarse[ell] - coarse[ell - 1], "L4") ** 2
        for ell in range(1, level + 1)
    ]
    q3 = max(increments) / k ** (2 * eta)
    return SampleQuantities(path=path, q1=q1, q2=q2, q3=q3)


def quantile_thresholds(
    quantities: Sequence[SampleQuantities], quantile: float
) -> SampleSetThresholds:
    """Empirical quantiles of each quantity over paths."""
    q = np.array([[s.q1, s.q2, s.q3] for s in quantities])
    values = np.quantile(q, quantile, axis=0)
    return SampleSetThresholds(*(float(v) for v in values))


def schedule_thresholds(
    k: float, eta: float, r: float, mu: float | None = None
) -> SampleSetThresholds:
    """Asymptotic thresholds kappa_1 = (mu/2) ln(1/k), kappa_2 = k^(mu+r),
    kappa_3 = k^(-eta), with mu = (eta - r) / 2 unless given."""
    if mu is None or mu < 0:
        mu = (eta - r) / 2
    if not eta - mu - r > 0:
        logger.warning(
            "Threshold schedule with eta - mu - r = %g <= 0.", eta - mu - r
        )
    return SampleSetThresholds(
        kappa1=mu / 2 * math.log(1 / k),
        kappa2=k ** (mu + r),
        kappa3=k ** (-eta),
    )


def membership_from_quantities(
    quantities: Sequence[SampleQuantities],
    thresholds: SampleSetThresholds,
    level: int,
    k: float,
    exceed_flags: np.ndarray | None = None,
) -> SampleSetStats:
    """Membership, complement probabilities and total-probability bound."""
    if not quantities:
        raise MissingDiagnosticsError("No sample-set quantities given!")
    ordered = sorted(quantities, key=lambda s: s.path)
    q = np.array([[s.q1, s.q2, s.q3] for s in ordered])
    in1 = q[:, 0] <= thresholds.kappa1
    in2 = q[:, 1] <= thresholds.kappa2
    in3 = q[:, 2] <= thresholds.kappa3
    complement = tuple(float(1 - m.mean()) for m in (in1, in2, in3))
    conditional = math.nan
    if exceed_flags is not None:
        inside = in1 & in2 & in3
        if inside.any():
            conditional = float(np.asarray(exceed_flags)[inside].mean())
    bound = sum(complement) + (0.0 if math.isnan(conditional) else conditional)
    return SampleSetStats(
        level=level,
        k=k,
        thresholds=thresholds,
        in1=in1,
        in2=in2,
        in3=in3,
        complement=complement,
        conditional=conditional,
        bound=min(bound, 1.0) if math.isnan(conditional) else bound,
    )


def sample_set_membership(
    traj_refs: Sequence[TrajectoryRecord],
    aux_z_errors: Sequence[ErrorRecord | float],
    thresholds: SampleSetThresholds,
    level: int,
    eta: float,
    exceed_flags: np.ndarray | None = None,
) -> SampleSetStats:
    """Sample-set membership of every path at one level.

    Args:
        traj_refs: Reference trajectory of each path.
        aux_z_errors: z-scheme error functional of each path at the level.
        thresholds: kappa_1, kappa_2, kappa_3.
        level: Number of steps of the level.
        eta: Hoelder exponent in Omega_3.
        exceed_flags: Optional exceedance flags for the conditional term.
    """
    if len(traj_refs) != len(aux_z_errors):
        raise MissingDiagnosticsError(
            f"{len(traj_refs)} reference trajectories but "
            f"{len(aux_z_errors)} z-errors!"
        )
    quantities = [
        sample_set_quantities(ref, z, level, eta, path=i)
        for i, (ref, z) in enumerate(zip(traj_refs, aux_z_errors))
    ]
    k = traj_refs[0].params.T / level
    return membership_from_quantities(
        quantities, thresholds, level, k, exceed_flags
    )
