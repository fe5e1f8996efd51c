"""Mean-zero periodic scalar and vector fields stored as Fourier coefficients.

Fields are immutable: the coefficient array is copied on construction and
marked read-only, so operations in operators.py always return new fields and
can be shared between threads.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from penalty_ns.spectral.grid import Grid, GridMismatchError
from penalty_ns.utils.types import PhysicalField, ScalarCoeffs, VectorCoeffs


def _freeze(coeffs: np.ndarray, mask: np.ndarray) -> np.ndarray:
    out = np.array(coeffs, dtype=complex) * mask
    out.setflags(write=False)
    return out


class _FieldBase:
    """Arithmetic shared by scalar and vector fields."""

    grid: Grid
    coeffs: np.ndarray

    def _new(self, coeffs: np.ndarray):
        return type(self)(self.grid, coeffs)

    def _check(self, other: "_FieldBase") -> None:
        if type(other) is not type(self):
            raise TypeError(
                f"Cannot combine {type(self).__name__} with "
                f"{type(other).__name__}!"
            )
        self.grid.check_same(other.grid)

    def __add__(self, other):
        self._check(other)
        return self._new(self.coeffs + other.coeffs)

    def __sub__(self, other):
        self._check(other)
        return self._new(self.coeffs - other.coeffs)

    def __neg__(self):
        return self._new(-self.coeffs)

    def __mul__(self, scalar: float):
        if not np.isscalar(scalar):
            return NotImplemented
        return self._new(self.coeffs * scalar)

    __rmul__ = __mul__

    def __truediv__(self, scalar: float):
        if not np.isscalar(scalar):
            return NotImplemented
        return self._new(self.coeffs / scalar)

    def is_finite(self) -> bool:
        """Whether all coefficients are finite."""
        return bool(np.all(np.isfinite(self.coeffs)))

    def mean_coefficient(self) -> float:
        """Largest magnitude of the mean-mode coefficient(s)."""
        return float(np.max(np.abs(self.coeffs[..., 0, 0])))

    def bit_equal(self, other: "_FieldBase") -> bool:
        """Exact equality of the coefficient arrays."""
        return type(other) is type(self) and np.array_equal(
            self.coeffs, other.coeffs
        )


@dataclass(frozen=True, eq=False)
class SpectralScalar(_FieldBase):
    """Real scalar field f(x) = sum_n coeffs[n] exp(i kappa_n . x).

    Hermitian symmetry coeffs(-n) = conj(coeffs(n)) holds whenever the field
    comes from real samples or from the operators in this package. The Nyquist
    rows are zeroed on construction; the mean mode is kept so that operators
    can reject non-mean-zero input, and every operator output pins it to 0.
    """

    grid: Grid
    coeffs: ScalarCoeffs

    def __post_init__(self) -> None:
        shape = (self.grid.N, self.grid.N)
        if np.shape(self.coeffs) != shape:
            raise ValueError(
                f"Scalar coefficients must have shape {shape}, but got "
                f"{np.shape(self.coeffs)}!"
            )
        coeffs = _freeze(self.coeffs, self.grid.nyquist_free)
        object.__setattr__(self, "coeffs", coeffs)

    @classmethod
    def zeros(cls, grid: Grid) -> "SpectralScalar":
        """Zero field."""
        return cls(grid, np.zeros((grid.N, grid.N), dtype=complex))

    @classmethod
    def from_physical(
        cls, grid: Grid, values: PhysicalField
    ) -> "SpectralScalar":
        """Build a field from real samples on the N x N grid."""
        values = np.asarray(values, dtype=float)
        if values.shape != (grid.N, grid.N):
            raise ValueError(
                f"Expected samples of shape {(grid.N, grid.N)}, but got "
                f"{values.shape}!"
            )
        return cls(grid, grid.forward(values))

    def to_physical(self, size: int | None = None) -> PhysicalField:
        """Real samples on the N x N grid (or a zero-padded size x size)."""
        return PhysicalField(self.grid.inverse(self.coeffs, size))


@dataclass(frozen=True, eq=False)
class SpectralVector(_FieldBase):
    """Real 2-D vector field with coefficient array of shape [2, N, N]."""

    grid: Grid
    coeffs: VectorCoeffs

    def __post_init__(self) -> None:
        shape = (2, self.grid.N, self.grid.N)
        if np.shape(self.coeffs) != shape:
            raise ValueError(
                f"Vector coefficients must have shape {shape}, but got "
                f"{np.shape(self.coeffs)}!"
            )
        coeffs = _freeze(self.coeffs, self.grid.nyquist_free)
        object.__setattr__(self, "coeffs", coeffs)

    @classmethod
    def zeros(cls, grid: Grid) -> "SpectralVector":
        """Zero field."""
        return cls(grid, np.zeros((2, grid.N, grid.N), dtype=complex))

    @classmethod
    def from_components(
        cls, first: SpectralScalar, second: SpectralScalar
    ) -> "SpectralVector":
        """Stack two scalar components sharing one grid."""
        first.grid.check_same(second.grid)
        return cls(first.grid, np.stack([first.coeffs, second.coeffs]))

    @classmethod
    def from_physical(
        cls, grid: Grid, values: PhysicalField
    ) -> "SpectralVector":
        """Build a field from real samples of shape [2, N, N]."""
        values = np.asarray(values, dtype=float)
        if values.shape != (2, grid.N, grid.N):
            raise ValueError(
                f"Expected samples of shape {(2, grid.N, grid.N)}, but got "
                f"{values.shape}!"
            )
        return cls(grid, grid.forward(values))

    def to_physical(self, size: int | None = None) -> PhysicalField:
        """Real samples of both components, shape [2, size, size]."""
        return PhysicalField(self.grid.inverse(self.coeffs, size))

    @property
    def x(self) -> SpectralScalar:
        """First component."""
        return SpectralScalar(self.grid, self.coeffs[0])

    @property
    def y(self) -> SpectralScalar:
        """Second component."""
        return SpectralScalar(self.grid, self.coeffs[1])


Field = Union[SpectralScalar, SpectralVector]


def same_grid(*fields: Field) -> Grid:
    """Return the shared grid of fields or raise GridMismatchError."""
    if not fields:
        raise GridMismatchError("No fields given!")
    grid = fields[0].grid
    for other in fields[1:]:
        grid.check_same(other.grid)
    return grid
