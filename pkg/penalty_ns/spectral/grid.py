"""Periodic grid on the torus (0, L)^2 and its wavevector tables."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.fft


class GridMismatchError(ValueError):
    """Fields living on different grids were combined."""


@dataclass(frozen=True)
class Grid:
    """Spectral grid with N modes per dimension on a square of side L.

    Coefficient arrays use the FFT ordering, i.e., index i holds integer
    wavenumber n = fftfreq(N, 1/N)[i] in {-N/2, ..., N/2 - 1}. The row and
    column with n = -N/2 (Nyquist) are kept at zero.
    """

    L: float = 2 * math.pi
    N: int = 32
    dealias_pad: float = 1.5
    fft_workers: int = 1
    _cache: dict = field(
        default_factory=dict, init=False, repr=False, compare=False
    )

    def __post_init__(self) -> None:
        """Validate grid parameters."""
        if not self.L > 0:
            raise ValueError(f"L must be positive, but it is {self.L}!")
        if self.N < 8 or self.N % 2 != 0:
            raise ValueError(f"N must be even and >= 8, but it is {self.N}!")
        if self.dealias_pad < 1.5:
            raise ValueError(
                f"dealias_pad must be >= 3/2, but it is {self.dealias_pad}!"
            )
        if self.fft_workers < 1:
            raise ValueError(
                f"fft_workers must be >= 1, but it is {self.fft_workers}!"
            )

    # ------------------------------------------------------------------ #

    @property
    def base_wavenumber(self) -> float:
        """Wavenumber 2 pi / L of the lowest mode."""
        return 2 * math.pi / self.L

    @property
    def padded_size(self) -> int:
        """Physical grid size used for dealiased products (even, >= 3N/2)."""
        size = math.ceil(self.dealias_pad * self.N)
        return size + size % 2

    @property
    def integers(self) -> np.ndarray:
        """Integer wavenumbers n_1, n_2 as an array of shape [2, N, N]."""
        if "integers" not in self._cache:
            n = np.rint(scipy.fft.fftfreq(self.N, 1.0 / self.N)).astype(int)
            n1, n2 = np.meshgrid(n, n, indexing="ij")
            self._cache["integers"] = np.stack([n1, n2])
        return self._cache["integers"]

    @property
    def kappa(self) -> np.ndarray:
        """Wavevectors kappa_n = 2 pi n / L, shape [2, N, N]."""
        if "kappa" not in self._cache:
            kappa = self.base_wavenumber * self.integers.astype(float)
            kappa.setflags(write=False)
            self._cache["kappa"] = kappa
        return self._cache["kappa"]

    @property
    def kappa_sq(self) -> np.ndarray:
        """|kappa_n|^2, shape [N, N]."""
        if "kappa_sq" not in self._cache:
            kappa_sq = (self.kappa**2).sum(0)
            kappa_sq.setflags(write=False)
            self._cache["kappa_sq"] = kappa_sq
        return self._cache["kappa_sq"]

    @property
    def inv_kappa_sq(self) -> np.ndarray:
        """1 / |kappa_n|^2 with the mean mode mapped to 0."""
        if "inv_kappa_sq" not in self._cache:
            kappa_sq = self.kappa_sq.copy()
            kappa_sq[0, 0] = 1.0
            inv = 1.0 / kappa_sq
            inv[0, 0] = 0.0
            inv.setflags(write=False)
            self._cache["inv_kappa_sq"] = inv
        return self._cache["inv_kappa_sq"]

    @property
    def mask(self) -> np.ndarray:
        """Boolean mask of retained modes (no mean, no Nyquist)."""
        if "mask" not in self._cache:
            mask = self.nyquist_free.copy()
            mask[0, 0] = False
            mask.setflags(write=False)
            self._cache["mask"] = mask
        return self._cache["mask"]

    @property
    def nyquist_free(self) -> np.ndarray:
        """Boolean mask of all modes except the Nyquist row and column."""
        if "nyquist_free" not in self._cache:
            n = self.integers
            mask = (n[0] != -self.N // 2) & (n[1] != -self.N // 2)
            mask.setflags(write=False)
            self._cache["nyquist_free"] = mask
        return self._cache["nyquist_free"]

    @property
    def points(self) -> np.ndarray:
        """Physical grid points x_1, x_2, shape [2, N, N]."""
        return self.physical_points(self.N)

    def physical_points(self, size: int) -> np.ndarray:
        """Uniform points of a size x size grid on (0, L)^2."""
        x = np.arange(size) * (self.L / size)
        return np.stack(np.meshgrid(x, x, indexing="ij"))

    def index_of(self, n1: int, n2: int) -> tuple[int, int]:
        """Array index of integer wavevector (n1, n2)."""
        half = self.N // 2
        if not (-half <= n1 < half and -half <= n2 < half):
            raise ValueError(
                f"Wavevector ({n1}, {n2}) is not resolved on N={self.N}!"
            )
        return n1 % self.N, n2 % self.N

    def check_same(self, other: "Grid") -> None:
        """Raise GridMismatchError if other is a different grid."""
        if self is other:
            return
        if (self.L, self.N) != (other.L, other.N):
            raise GridMismatchError(
                f"Grid mismatch: (L={self.L}, N={self.N}) vs "
                f"(L={other.L}, N={other.N})!"
            )

    # ------------------------------------------------------------------ #
    #                      Transforms and padding                        #
    # ------------------------------------------------------------------ #

    def forward(self, values: np.ndarray) -> np.ndarray:
        """Physical samples -> coefficients with f = sum_n c_n e^{i k.x}."""
        size = values.shape[-1]
        return scipy.fft.fft2(values, workers=self.fft_workers) / size**2

    def inverse(
        self, coeffs: np.ndarray, size: int | None = None
    ) -> np.ndarray:
        """Coefficients -> real physical samples on a size x size grid."""
        if size is None or size == self.N:
            full = coeffs
            size = self.N
        else:
            full = self.pad(coeffs, size)
        values = scipy.fft.ifft2(full, workers=self.fft_workers) * size**2
        return values.real

    def pad(self, coeffs: np.ndarray, size: int) -> np.ndarray:
        """Zero-pad FFT-ordered coefficients from N to size per dimension."""
        half = self.N // 2
        out = np.zeros(coeffs.shape[:-2] + (size, size), dtype=complex)
        low = slice(0, half)
        high_src = slice(self.N - half, self.N)
        high_dst = slice(size - half, size)
        out[..., low, low] = coeffs[..., low, low]
        out[..., low, high_dst] = coeffs[..., low, high_src]
        out[..., high_dst, low] = coeffs[..., high_src, low]
        out[..., high_dst, high_dst] = coeffs[..., high_src, high_src]
        return out

    def truncate(self, coeffs: np.ndarray) -> np.ndarray:
        """Keep the N x N low-mode block of padded FFT-ordered coefficients."""
        size = coeffs.shape[-1]
        half = self.N // 2
        out = np.zeros(coeffs.shape[:-2] + (self.N, self.N), dtype=complex)
        low = slice(0, half)
        high_src = slice(size - half, size)
        high_dst = slice(self.N - half, self.N)
        out[..., low, low] = coeffs[..., low, low]
        out[..., low, high_dst] = coeffs[..., low, high_src]
        out[..., high_dst, low] = coeffs[..., high_src, low]
        out[..., high_dst, high_dst] = coeffs[..., high_src, high_src]
        return out * self.mask
