"""Exact spectral differential operators, Leray projection and norms.

All operators are pure: they take immutable fields and return new ones with
the mean mode pinned to zero.
"""

from __future__ import annotations

import logging
import math

import numpy as np

from penalty_ns.spectral.fields import (
    Field,
    SpectralScalar,
    SpectralVector,
    same_grid,
)
from penalty_ns.spectral.grid import Grid
from penalty_ns.utils.types import NormOrder

logger = logging.getLogger(__name__)

# Relative size of a mean coefficient that is treated as nonzero
_MEAN_TOL = 1e-12


class MeanModeError(ValueError):
    """An operator that needs a mean-zero field got a nonzero mean."""


def _pinned(field: Field, coeffs: np.ndarray) -> Field:
    return type(field)(field.grid, coeffs * field.grid.mask)


def _check_mean_zero(field: Field, name: str) -> None:
    total = math.sqrt(float(np.sum(np.abs(field.coeffs) ** 2)))
    mean = field.mean_coefficient()
    if mean > _MEAN_TOL * max(total, np.finfo(float).tiny):
        raise MeanModeError(
            f"{name} needs a mean-zero field, but the mean coefficient is "
            f"{mean:.3e} (field coefficient norm {total:.3e})!"
        )


# =========================================================================== #
#                            Differential operators                           #
# =========================================================================== #


def gradient(f: SpectralScalar) -> SpectralVector:
    """Gradient with coefficients i kappa_j f(n)."""
    if not isinstance(f, SpectralScalar):
        raise TypeError(f"gradient expects a SpectralScalar, got {type(f)}!")
    coeffs = 1j * f.grid.kappa * f.coeffs[None]
    return SpectralVector(f.grid, coeffs * f.grid.mask)


def divergence(u: SpectralVector) -> SpectralScalar:
    """Divergence with coefficients i kappa . u(n)."""
    if not isinstance(u, SpectralVector):
        raise TypeError(f"divergence expects a SpectralVector, got {type(u)}!")
    coeffs = 1j * np.sum(u.grid.kappa * u.coeffs, axis=0)
    return SpectralScalar(u.grid, coeffs * u.grid.mask)


def laplacian(f: Field) -> Field:
    """Laplacian, -|kappa|^2 f(n), of a scalar or vector field."""
    return _pinned(f, -f.grid.kappa_sq * f.coeffs)


def inv_laplacian(f: Field) -> Field:
    """Inverse Laplacian on mean-zero fields; the mean mode stays 0.

    Raises:
        MeanModeError: The mean coefficient of f is not negligible.
    """
    _check_mean_zero(f, "inv_laplacian")
    return _pinned(f, -f.grid.inv_kappa_sq * f.coeffs)


def leray_project(u: SpectralVector) -> SpectralVector:
    """Orthogonal projection onto divergence-free fields, mode by mode."""
    kappa = u.grid.kappa
    k_dot_u = np.sum(kappa * u.coeffs, axis=0)
    coeffs = u.coeffs - kappa * (k_dot_u * u.grid.inv_kappa_sq)[None]
    return SpectralVector(u.grid, coeffs * u.grid.mask)


def project_gradient(u: SpectralVector) -> SpectralVector:
    """Complement of leray_project: the gradient part of u."""
    return u - leray_project(u)


# =========================================================================== #
#                               Inner products                                #
# =========================================================================== #


def inner(f: Field, g: Field) -> float:
    """L2 inner product L^2 sum Re(f(n) conj(g(n))) over all components."""
    grid = same_grid(f, g)
    if type(f) is not type(g):
        raise TypeError(
            f"Cannot pair {type(f).__name__} with {type(g).__name__}!"
        )
    return grid.L**2 * float(np.sum((f.coeffs * np.conj(g.coeffs)).real))


def _sobolev_norm(f: Field, s: float) -> float:
    grid = f.grid
    if s < 0:
        _check_mean_zero(f, f"norm of order {s}")
    weights = np.zeros_like(grid.kappa_sq)
    nonzero = grid.kappa_sq > 0
    weights[nonzero] = grid.kappa_sq[nonzero] ** s
    if s == 0:
        weights[0, 0] = 1.0
    energy = np.sum(weights * np.abs(f.coeffs) ** 2)
    return grid.L * math.sqrt(float(energy))


def _l4_norm(f: Field) -> float:
    grid = f.grid
    # |f|^4 carries modes up to 2N - 4; fewer points alias it
    size = max(grid.padded_size, 2 * grid.N)
    values = f.to_physical(size)
    if isinstance(f, SpectralVector):
        squared = np.sum(values**2, axis=0)
    else:
        squared = values**2
    integral = float(np.sum(squared**2)) * (grid.L / size) ** 2
    return integral**0.25


def norm(f: Field, order: NormOrder = "L2") -> float:
    """Sobolev norm of real order s, or the L2 / L4 norm.

    The Sobolev-s norm is (L^2 sum |kappa|^{2s} |f(n)|^2)^{1/2}, so order 0
    coincides with L2. L4 is evaluated by quadrature of |f|^4 on a grid of
    at least 2N points per side, which is exact since the Nyquist modes are
    zero. The 3/2 dealias grid alone is not enough: sin(3x) cos(3y) on
    N = 8 would come out as 1.772 instead of 1.535.

    Args:
        f: Scalar or vector field.
        order: Real exponent s, or "L2" / "L4". "H1" and "H-1" are accepted
            as aliases of 1 and -1.

    Raises:
        MeanModeError: Negative order on a field with nonzero mean.
        ValueError: Unknown order tag.
    """
    if isinstance(order, str):
        tag = order.upper()
        if tag == "L4":
            return _l4_norm(f)
        aliases = {"L2": 0.0, "H1": 1.0, "H-1": -1.0}
        if tag not in aliases:
            raise ValueError(
                f"Unknown norm order {order}! Use a number, L2, L4, H1 or H-1."
            )
        order = aliases[tag]
    return _sobolev_norm(f, float(order))


# =========================================================================== #
#                               Field builders                                #
# =========================================================================== #


def random_scalar(
    grid: Grid,
    rng: np.random.Generator,
    decay: float = 2.0,
    amplitude: float = 1.0,
) -> SpectralScalar:
    """Random real mean-zero field with spectrum ~ (1 + |kappa|^2)^(-decay/2).

    The field is scaled so that its L2 norm equals amplitude.
    """
    envelope = (1.0 + grid.kappa_sq) ** (-decay / 2)
    raw = rng.standard_normal((grid.N, grid.N)) + 1j * rng.standard_normal(
        (grid.N, grid.N)
    )
    # Real part of the synthesized samples enforces Hermitian symmetry
    values = grid.inverse(raw * envelope * grid.mask)
    field = SpectralScalar(grid, grid.forward(values) * grid.mask)
    size = norm(field)
    if size == 0:
        return field
    return field * (amplitude / size)


def random_vector(
    grid: Grid,
    rng: np.random.Generator,
    decay: float = 2.0,
    amplitude: float = 1.0,
    solenoidal: bool = True,
) -> SpectralVector:
    """Random real mean-zero vector field, optionally divergence-free.

    The L2 norm of the returned field equals amplitude.
    """
    u = SpectralVector.from_components(
        random_scalar(grid, rng, decay), random_scalar(grid, rng, decay)
    )
    if solenoidal:
        u = leray_project(u)
    size = norm(u)
    if size == 0:
        return u
    return u * (amplitude / size)


def taylor_green(grid: Grid, amplitude: float = 1.0) -> SpectralVector:
    """Taylor-Green vortex a (sin x cos y, -cos x sin y) at the lowest mode."""
    x, y = grid.base_wavenumber * grid.points
    values = amplitude * np.stack(
        [np.sin(x) * np.cos(y), -np.cos(x) * np.sin(y)]
    )
    return SpectralVector.from_physical(grid, values)


def taylor_green_pressure(grid: Grid, amplitude: float = 1.0) -> SpectralScalar:
    """Pressure (cos 2x + cos 2y) a^2 / 4 balancing Taylor-Green advection."""
    x, y = grid.base_wavenumber * grid.points
    values = amplitude**2 / 4 * (np.cos(2 * x) + np.cos(2 * y))
    return SpectralScalar.from_physical(grid, values)
