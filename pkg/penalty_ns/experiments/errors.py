"""Error functionals between a coarse trajectory and a fine reference.

For e^l = u_ref(t_l) - u^l and q^l = p_ref(t_l) - p^l:

    E^M  = max_m |e^m|^2 + nu k sum |grad e^l|^2 + k sum |q^l|^2
    E~^M = max_m |e^m|^2 + (nu k sum |grad e^l|^2)^(1/2)
                          + (k sum |q^l|^2)^(1/2)

The same functional applied to the z-scheme against a Stokes reference is
the auxiliary z-error used by the sample sets.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Mapping

import numpy as np

from penalty_ns.schemes.trajectory import TrajectoryRecord
from penalty_ns.spectral.fields import SpectralScalar
from penalty_ns.spectral.operators import norm

logger = logging.getLogger(__name__)


class CouplingError(ValueError):
    """Trajectories are on different time grids or noise paths."""


@dataclass(frozen=True)
class ErrorRecord:
    """Error functionals of one path at one level."""

    path: int
    level: int
    k: float
    eps: float
    em: float
    tem: float
    max_term: float
    grad_term: float
    pressure_term: float
    blew_up: bool = False

    @classmethod
    def from_terms(
        cls,
        path: int,
        level: int,
        k: float,
        eps: float,
        max_term: float,
        grad_term: float,
        pressure_term: float,
    ) -> "ErrorRecord":
        """Assemble E^M and E~^M from the three terms."""
        return cls(
            path=path,
            level=level,
            k=k,
            eps=eps,
            em=max_term + grad_term + pressure_term,
            tem=max_term + math.sqrt(grad_term) + math.sqrt(pressure_term),
            max_term=max_term,
            grad_term=grad_term,
            pressure_term=pressure_term,
        )

    @classmethod
    def blown_up(
        cls, path: int, level: int, k: float, eps: float
    ) -> "ErrorRecord":
        """Record of a failed run; counts as an exceedance."""
        inf = math.inf
        return cls(path, level, k, eps, inf, inf, inf, inf, inf, True)

    def as_row(self) -> Dict[str, object]:
        """Row of errors.csv."""
        return {
            "path": self.path,
            "level": self.level,
            "k": self.k,
            "eps": self.eps,
            "EM": self.em,
            "tEM": self.tem,
            "EM_max_term": self.max_term,
            "EM_grad_term": self.grad_term,
            "EM_pressure_term": self.pressure_term,
            "blew_up": int(self.blew_up),
        }


@dataclass
class ErrorReport:
    """Error records of all paths at one level."""

    level: int
    k: float
    eps: float
    records: List[ErrorRecord] = field(default_factory=list)

    @property
    def M(self) -> int:
        return self.level

    def values(self, name: str = "em") -> np.ndarray:
        """Per-path values of one field, in path order."""
        ordered = sorted(self.records, key=lambda r: r.path)
        return np.array([getattr(r, name) for r in ordered], dtype=float)

    @property
    def blew_up(self) -> np.ndarray:
        return self.values("blew_up").astype(bool)

    def finite_mean(self, name: str = "em") -> float:
        """Mean over paths that did not blow up (nan if none)."""
        values = self.values(name)[~self.blew_up]
        return float(values.mean()) if values.size else math.nan

    def rows(self) -> List[Dict[str, object]]:
        return [r.as_row() for r in sorted(self.records, key=lambda r: r.path)]


def _check_coupling(
    coarse: TrajectoryRecord, ref: TrajectoryRecord
) -> int:
    if not math.isclose(coarse.params.T, ref.params.T, rel_tol=1e-14):
        raise CouplingError(
            f"Final times differ: {coarse.params.T} vs {ref.params.T}!"
        )
    if coarse.M < 1 or ref.M % coarse.M != 0:
        raise CouplingError(
            f"Reference M={ref.M} is not a multiple of M={coarse.M}!"
        )
    if coarse.coupling_key != ref.coupling_key:
        raise CouplingError(
            f"Noise paths differ: {coarse.coupling_key} vs "
            f"{ref.coupling_key}!"
        )
    return ref.M // coarse.M


def compute_error_record(
    traj_coarse: TrajectoryRecord,
    traj_ref: TrajectoryRecord,
    pressures: Mapping[int, SpectralScalar] | None = None,
    path: int = 0,
) -> ErrorRecord:
    """Error functionals of a coarse run against its reference.

    Args:
        traj_coarse: Coarse trajectory with snapshots at every step.
        traj_ref: Reference with snapshots at every coarse time.
        pressures: Optional reference pressures by coarse step index;
            defaults to the pressures recorded in traj_ref.
        path: Path index stored in the record.

    Raises:
        CouplingError: Time grids or noise paths do not match.
        KeyError: A needed snapshot was not recorded.
    """
    ratio = _check_coupling(traj_coarse, traj_ref)
    params = traj_coarse.params
    k, nu = params.k, params.nu
    max_term = 0.0
    grad_sum = 0.0
    pressure_sum = 0.0
    for ell in range(1, traj_coarse.M + 1):
        e = traj_ref.velocity(ell * ratio) - traj_coarse.velocity(ell)
        if pressures is not None:
            p_ref = pressures[ell]
        else:
            p_ref = traj_ref.pressure(ell * ratio)
        q = p_ref - traj_coarse.pressure(ell)
        max_term = max(max_term, norm(e) ** 2)
        grad_sum += norm(e, 1) ** 2
        pressure_sum += norm(q) ** 2
    return ErrorRecord.from_terms(
        path=path,
        level=traj_coarse.M,
        k=k,
        eps=params.eps,
        max_term=max_term,
        grad_term=nu * k * grad_sum,
        pressure_term=k * pressure_sum,
    )


def compute_error_functionals(
    traj_coarse: TrajectoryRecord,
    traj_ref: TrajectoryRecord,
    pressures: Mapping[int, SpectralScalar] | None = None,
    path: int = 0,
) -> ErrorReport:
    """ErrorReport holding the error record of one path."""
    record = compute_error_record(traj_coarse, traj_ref, pressures, path)
    return ErrorReport(
        level=record.level, k=record.k, eps=record.eps, records=[record]
    )


def merge_reports(reports: List[ErrorReport]) -> List[ErrorReport]:
    """Merge per-path reports into one report per level, levels ascending."""
    merged: Dict[int, ErrorReport] = {}
    for report in reports:
        target = merged.setdefault(
            report.level, ErrorReport(report.level, report.k, report.eps)
        )
        target.records.extend(report.records)
    for report in merged.values():
        report.records.sort(key=lambda r: r.path)
    return [merged[level] for level in sorted(merged)]
