"""Log-log least-squares rate fits."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Dict, Sequence

import numpy as np

from penalty_ns.hparams import MIN_STUDY_LEVELS

logger = logging.getLogger(__name__)

MIN_LEVELS = MIN_STUDY_LEVELS


class RateFitError(ValueError):
    """Too few usable points for a rate fit."""


@dataclass(frozen=True)
class RateFit:
    """Least-squares line log(response) = slope log(k) + intercept.

    Attributes:
        levels: Step sizes k used in the fit.
        responses: Responses used in the fit.
        slope: Fitted rate.
        intercept: Fitted log-constant.
        residual: Root-mean-square residual in log space.
        response: Name of the fitted quantity.
    """

    levels: np.ndarray
    responses: np.ndarray
    slope: float
    intercept: float
    residual: float
    response: str = ""

    def as_row(self) -> Dict[str, object]:
        """Row of rates.csv."""
        return {
            "response": self.response,
            "slope": self.slope,
            "intercept": self.intercept,
            "residual": self.residual,
        }


def fit_rate(
    levels: Sequence[float],
    responses: Sequence[float],
    response: str = "",
) -> RateFit:
    """Fit a line through (log k, log response).

    Points with a nonpositive or non-finite level or response are dropped
    with a warning.

    Raises:
        RateFitError: Fewer than 3 usable points remain.
    """
    levels = np.asarray(levels, dtype=float)
    responses = np.asarray(responses, dtype=float)
    if levels.shape != responses.shape:
        raise ValueError(
            f"levels and responses differ in shape: {levels.shape} vs "
            f"{responses.shape}!"
        )
    usable = (
        np.isfinite(levels)
        & np.isfinite(responses)
        & (levels > 0)
        & (responses > 0)
    )
    if not usable.all():
        logger.warning(
            "Excluding %d nonpositive or non-finite point(s) from the %s "
            "rate fit: %s",
            int((~usable).sum()),
            response or "",
            list(zip(levels[~usable].tolist(), responses[~usable].tolist())),
        )
    if usable.sum() < MIN_LEVELS:
        raise RateFitError(
            f"A rate fit needs at least {MIN_LEVELS} positive points, but "
            f"only {int(usable.sum())} remain!"
        )
    x = np.log(levels[usable])
    y = np.log(responses[usable])
    slope, intercept = np.polyfit(x, y, 1)
    residual = math.sqrt(float(np.mean((y - (slope * x + intercept)) ** 2)))
    return RateFit(
        levels=levels[usable],
        responses=responses[usable],
        slope=float(slope),
        intercept=float(intercept),
        residual=residual,
        response=response,
    )
