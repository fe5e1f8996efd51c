"""Dealiased convective operators B, B~ and the trilinear form b~.

B(u, v) = [u . grad] v and B~(u, v) = B(u, v) + (div u) v / 2. Products are
formed on the zero-padded grid and truncated back to N modes, so
b~(u, v, v) = 0 and b~(u, v, w) = -b~(u, w, v) hold to roundoff.
"""

from __future__ import annotations

import logging

import numpy as np

from penalty_ns.nonlinear.workspace import PaddedWorkspace, get_workspace
from penalty_ns.spectral.fields import SpectralVector, same_grid
from penalty_ns.spectral.operators import inner

logger = logging.getLogger(__name__)


def _convect(
    u: SpectralVector,
    v: SpectralVector,
    with_divergence: bool,
    workspace: PaddedWorkspace | None,
) -> SpectralVector:
    grid = same_grid(u, v)
    if workspace is None:
        workspace = get_workspace(grid)
    kappa = grid.kappa
    # Rows: u_0, u_1, d_0 v_0, d_1 v_0, d_0 v_1, d_1 v_1, [v_0, v_1, div u]
    stack = [u.coeffs[0], u.coeffs[1]]
    for j in range(2):
        for i in range(2):
            stack.append(1j * kappa[i] * v.coeffs[j])
    if with_divergence:
        stack.extend([v.coeffs[0], v.coeffs[1]])
        stack.append(1j * np.sum(kappa * u.coeffs, axis=0))
    values = workspace.to_physical(np.stack(stack))

    conv = np.empty((2,) + values.shape[1:])
    for j in range(2):
        conv[j] = values[0] * values[2 + 2 * j] + values[1] * values[3 + 2 * j]
    if with_divergence:
        conv += 0.5 * values[8][None] * values[6:8]
    return SpectralVector(grid, workspace.to_coeffs(conv))


def b_tilde_apply(
    u: SpectralVector,
    v: SpectralVector,
    workspace: PaddedWorkspace | None = None,
) -> SpectralVector:
    """Band-limited coefficients of [u . grad] v + (div u) v / 2.

    Raises:
        GridMismatchError: u and v live on different grids.
    """
    return _convect(u, v, True, workspace)


def b_apply(
    u: SpectralVector,
    v: SpectralVector,
    workspace: PaddedWorkspace | None = None,
) -> SpectralVector:
    """Band-limited coefficients of [u . grad] v without the div correction."""
    return _convect(u, v, False, workspace)


def trilinear(
    u: SpectralVector,
    v: SpectralVector,
    w: SpectralVector,
    workspace: PaddedWorkspace | None = None,
) -> float:
    """b~(u, v, w) = <B~(u, v), w> in L2."""
    same_grid(u, v, w)
    return inner(b_tilde_apply(u, v, workspace), w)
