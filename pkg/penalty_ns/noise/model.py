"""Solenoidal trace-class Q-Wiener noise on the torus.

The noise is expanded in the real orthonormal basis

    e_{n,c} = sqrt(2)/L (n_perp/|n|) cos(kappa_n . x)
    e_{n,s} = sqrt(2)/L (n_perp/|n|) sin(kappa_n . x)

over half-lattice representatives n (n1 > 0, or n1 == 0 and n2 > 0) with
|n|_inf <= J, and n_perp = (-n2, n1). Mode n carries variance
q_n = (1 + |kappa_n|^2)^(-gamma) on both channels.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from penalty_ns.hparams import DEFAULT_J_CAP
from penalty_ns.spectral.fields import SpectralVector
from penalty_ns.spectral.grid import Grid

logger = logging.getLogger(__name__)

CHANNELS = ("cos", "sin")


def default_cutoff(N: int) -> int:
    """Default mode cutoff min(8, N / 4)."""
    return max(1, min(DEFAULT_J_CAP, N // 4))


def representatives(J: int) -> np.ndarray:
    """Half-lattice wavevectors with |n|_inf <= J, shape [K, 2].

    Ordered by n1 then n2, so the list for J is a stable function of J.
    """
    modes = [
        (n1, n2)
        for n1 in range(0, J + 1)
        for n2 in range(-J, J + 1)
        if n1 > 0 or (n1 == 0 and n2 > 0)
    ]
    return np.array(modes, dtype=int).reshape(-1, 2)


@dataclass(frozen=True, eq=False)
class NoiseModel:
    """Solenoidal noise basis, per-mode variances and trace of Q.

    Attributes:
        grid: Grid the noise fields live on.
        J: Mode cutoff.
        gamma: Spectral decay exponent.
        modes: Integer representatives n, shape [K, 2].
        variances: q_n per representative, shape [K].
        trace: Sum of q_n over modes and both channels.
    """

    grid: Grid
    J: int
    gamma: float
    modes: np.ndarray
    variances: np.ndarray
    trace: float

    @property
    def num_modes(self) -> int:
        """Number of representative wavevectors K."""
        return len(self.modes)

    @property
    def num_basis(self) -> int:
        """Number of real basis fields, 2K."""
        return 2 * self.num_modes

    @property
    def directions(self) -> np.ndarray:
        """Unit vectors n_perp / |n|, shape [K, 2]."""
        n = self.modes.astype(float)
        perp = np.stack([-n[:, 1], n[:, 0]], axis=1)
        return perp / np.linalg.norm(n, axis=1)[:, None]

    @property
    def amplitudes(self) -> np.ndarray:
        """Coefficient scale sqrt(2)/L * sqrt(q_n)/2 of one channel."""
        return math.sqrt(2) / self.grid.L * np.sqrt(self.variances) / 2

    def draws_to_field(self, draws: np.ndarray) -> SpectralVector:
        """Field sum_n sqrt(q_n) (d_c e_{n,c} + d_s e_{n,s}).

        Args:
            draws: Brownian increments per (mode, channel), shape [K, 2].
        """
        draws = np.asarray(draws, dtype=float)
        if draws.shape != (self.num_modes, 2):
            raise ValueError(
                f"Draws must have shape {(self.num_modes, 2)}, but got "
                f"{draws.shape}!"
            )
        grid = self.grid
        plus = (self.modes[:, 0] % grid.N, self.modes[:, 1] % grid.N)
        minus = (-self.modes[:, 0] % grid.N, -self.modes[:, 1] % grid.N)
        scale = self.amplitudes * (draws[:, 0] - 1j * draws[:, 1])
        coeffs = np.zeros((2, grid.N, grid.N), dtype=complex)
        for j in range(2):
            values = self.directions[:, j] * scale
            coeffs[j][plus] = values
            coeffs[j][minus] = np.conj(values)
        return SpectralVector(grid, coeffs)


def build_noise_model(
    grid: Grid, J: int | None = None, gamma: float = 3.0
) -> NoiseModel:
    """Build the solenoidal noise model.

    Args:
        grid: Grid for the noise fields.
        J: Mode cutoff. None or -1 selects min(8, N/4).
        gamma: Decay exponent of q_n; must exceed 2.

    Raises:
        ValueError: J < 1, gamma <= 2, or modes not resolved (2J+1 > N).
    """
    if J is None or J == -1:
        J = default_cutoff(grid.N)
    if J < 1:
        raise ValueError(f"J must be >= 1, but it is {J}!")
    if not gamma > 2:
        raise ValueError(
            f"gamma must be > 2 for a trace-class covariance, but it is "
            f"{gamma}!"
        )
    if 2 * J + 1 > grid.N:
        raise ValueError(
            f"Noise modes |n| <= J={J} are not resolved on N={grid.N} "
            f"(need 2J+1 <= N)!"
        )
    modes = representatives(J)
    kappa_sq = (grid.base_wavenumber**2) * np.sum(modes**2, axis=1)
    variances = (1.0 + kappa_sq) ** (-gamma)
    trace = float(2 * np.sum(variances))
    modes.setflags(write=False)
    variances.setflags(write=False)
    logger.debug(
        "Noise model: J=%d, gamma=%g, %d modes, trace=%.6e.",
        J,
        gamma,
        len(modes),
        trace,
    )
    return NoiseModel(
        grid=grid,
        J=int(J),
        gamma=float(gamma),
        modes=modes,
        variances=variances,
        trace=trace,
    )


def basis_field(model: NoiseModel, index: int, channel: int) -> SpectralVector:
    """Unit-variance basis field e_{n,c} (channel 0) or e_{n,s} (channel 1)."""
    if not 0 <= index < model.num_modes:
        raise IndexError(
            f"Mode index must be in [0, {model.num_modes}), but it is {index}!"
        )
    if channel not in (0, 1):
        raise ValueError(f"channel must be 0 or 1, but it is {channel}!")
    draws = np.zeros((model.num_modes, 2))
    draws[index, channel] = 1.0 / math.sqrt(model.variances[index])
    return model.draws_to_field(draws)


def gram_matrix(model: NoiseModel) -> np.ndarray:
    """L2 Gram matrix of all basis fields (cos/sin interleaved per mode)."""
    fields = [
        basis_field(model, i, c)
        for i in range(model.num_modes)
        for c in (0, 1)
    ]
    stacked = np.stack([f.coeffs.ravel() for f in fields])
    return model.grid.L**2 * (stacked @ stacked.conj().T).real
