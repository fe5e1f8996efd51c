"""Exact per-mode solves of the implicit linear parts of the schemes."""

from __future__ import annotations

import numpy as np

from penalty_ns.spectral.fields import SpectralVector


def penalty_block_solve(
    rhs: SpectralVector, nu: float, k: float, eps: float
) -> SpectralVector:
    """Solve (1 + nu k |kappa|^2) u + (k/eps) kappa (kappa . u) = rhs.

    This is u + nu k (-Laplace) u - (k/eps) grad div u = rhs, inverted per
    mode with the Sherman-Morrison formula for a I + b kappa kappa^T.
    """
    grid = rhs.grid
    a = 1.0 + nu * k * grid.kappa_sq
    b = k / eps
    k_dot_rhs = np.sum(grid.kappa * rhs.coeffs, axis=0)
    correction = b * k_dot_rhs / (a + b * grid.kappa_sq)
    coeffs = (rhs.coeffs - grid.kappa * correction[None]) / a[None]
    return SpectralVector(grid, coeffs * grid.mask)


def heat_solve(rhs: SpectralVector, nu: float, k: float) -> SpectralVector:
    """Solve (1 + nu k |kappa|^2) u = rhs."""
    grid = rhs.grid
    a = 1.0 + nu * k * grid.kappa_sq
    return SpectralVector(grid, rhs.coeffs / a[None] * grid.mask)
