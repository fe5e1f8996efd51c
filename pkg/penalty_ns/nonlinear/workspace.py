"""Per-thread workspace for dealiased products on the zero-padded grid."""

from __future__ import annotations

import threading

import numpy as np

from penalty_ns.spectral.grid import Grid

_LOCAL = threading.local()


class PaddedWorkspace:
    """Transforms between N-mode coefficients and the padded physical grid.

    The padded grid has at least ceil(3N/2) points per dimension, so the
    product of two band-limited fields is alias-free on the retained modes.
    A workspace must not be shared between threads; use get_workspace().
    """

    def __init__(self, grid: Grid) -> None:
        """Initialize PaddedWorkspace.

        Args:
            grid: Grid whose fields are multiplied.
        """
        self.grid = grid
        self.size = grid.padded_size
        if self.size < -(-3 * grid.N // 2):
            raise ValueError(
                f"Padded size {self.size} is below 3N/2 for N={grid.N}!"
            )

    def to_physical(self, coeffs: np.ndarray) -> np.ndarray:
        """Stacked coefficient arrays [..., N, N] -> padded samples."""
        return self.grid.inverse(coeffs, self.size)

    def to_coeffs(self, values: np.ndarray) -> np.ndarray:
        """Padded samples -> N-mode coefficients (mean and Nyquist zeroed)."""
        return self.grid.truncate(self.grid.forward(values))


def get_workspace(grid: Grid) -> PaddedWorkspace:
    """Workspace for grid owned by the calling thread."""
    cache = getattr(_LOCAL, "workspaces", None)
    if cache is None:
        cache = _LOCAL.workspaces = {}
    key = (grid.L, grid.N, grid.padded_size)
    if key not in cache:
        cache[key] = PaddedWorkspace(grid)
    return cache[key]
