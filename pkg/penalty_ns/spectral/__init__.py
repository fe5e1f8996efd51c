"""Mean-zero periodic fields on the torus and exact spectral operators."""

from penalty_ns.spectral.fields import SpectralScalar, SpectralVector
from penalty_ns.spectral.grid import Grid, GridMismatchError
from penalty_ns.spectral.operators import (
    MeanModeError,
    divergence,
    gradient,
    inner,
    inv_laplacian,
    laplacian,
    leray_project,
    norm,
)

__all__ = [
    "Grid",
    "GridMismatchError",
    "MeanModeError",
    "SpectralScalar",
    "SpectralVector",
    "divergence",
    "gradient",
    "inner",
    "inv_laplacian",
    "laplacian",
    "leray_project",
    "norm",
]
