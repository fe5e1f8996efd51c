"""Brute-force estimates of the embedding constants used in sanity checks."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from penalty_ns.nonlinear.convection import trilinear
from penalty_ns.spectral.grid import Grid
from penalty_ns.spectral.operators import norm, random_vector

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ConstantEstimate:
    """Largest observed ratio over random samples."""

    value: float
    trials: int
    ratios: np.ndarray


def estimate_trilinear_constant(
    grid: Grid,
    rng: np.random.Generator,
    trials: int = 100,
    decay: float = 2.0,
) -> ConstantEstimate:
    """max |b~(u, v, w)| / (|u|_1 |v|_1 |w|_1) over random triples.

    u is not projected, so the divergence correction is exercised.
    """
    ratios = np.empty(trials)
    for t in range(trials):
        u = random_vector(grid, rng, decay, solenoidal=False)
        v = random_vector(grid, rng, decay, solenoidal=False)
        w = random_vector(grid, rng, decay, solenoidal=False)
        scale = norm(u, 1) * norm(v, 1) * norm(w, 1)
        ratios[t] = abs(trilinear(u, v, w)) / scale
    logger.debug("Trilinear constant estimate: %.4e", ratios.max())
    return ConstantEstimate(float(ratios.max()), trials, ratios)


def estimate_ladyzhenskaya_constant(
    grid: Grid,
    rng: np.random.Generator,
    trials: int = 100,
    decay: float = 2.0,
) -> ConstantEstimate:
    """max |u|_L4 / (|u|^(1/2) |u|_1^(1/2)) over random fields."""
    ratios = np.empty(trials)
    for t in range(trials):
        u = random_vector(grid, rng, decay, solenoidal=False)
        ratios[t] = norm(u, "L4") / np.sqrt(norm(u) * norm(u, 1))
    logger.debug("Ladyzhenskaya constant estimate: %.4e", ratios.max())
    return ConstantEstimate(float(ratios.max()), trials, ratios)
