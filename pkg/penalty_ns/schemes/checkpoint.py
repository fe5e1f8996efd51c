"""Checkpoint files holding a scheme state and the noise cursor."""

from __future__ import annotations

import logging
import pathlib
from typing import Any, Dict, Tuple

import numpy as np

from penalty_ns.schemes.base_scheme import DecomposedState, PenaltyState
from penalty_ns.spectral.fields import SpectralScalar, SpectralVector
from penalty_ns.spectral.grid import Grid
from penalty_ns.spectral.snapshot import read_container, write_container

logger = logging.getLogger(__name__)

_VECTORS = ("u", "u_tilde", "advector")
_SCALARS = ("phi", "p", "p_tilde")


def _pack(state: PenaltyState, prefix: str) -> Dict[str, np.ndarray]:
    arrays = {}
    for name in _VECTORS + _SCALARS:
        value = getattr(state, name)
        if value is not None:
            arrays[prefix + name] = value.coeffs
    return arrays


def _unpack(
    arrays: Dict[str, np.ndarray],
    grid: Grid,
    prefix: str,
    meta: Dict[str, Any],
) -> PenaltyState:
    fields = {}
    for name in _VECTORS:
        key = prefix + name
        fields[name] = (
            SpectralVector(grid, arrays[key]) if key in arrays else None
        )
    for name in _SCALARS:
        fields[name] = SpectralScalar(grid, arrays[prefix + name])
    return PenaltyState(
        step=int(meta[prefix + "step"]),
        picard_iters=int(meta[prefix + "picard_iters"]),
        **fields,
    )


def save_checkpoint(
    path: str | pathlib.Path,
    state: PenaltyState | DecomposedState,
    metadata: Dict[str, Any] | None = None,
) -> None:
    """Write state and metadata (scheme tag, noise cursor, ...) to path."""
    meta = dict(metadata or {})
    if isinstance(state, DecomposedState):
        parts = {"z.": state.z, "v.": state.v}
        meta["decomposed"] = True
    else:
        parts = {"": state}
        meta["decomposed"] = False
    arrays = {}
    for prefix, part in parts.items():
        arrays.update(_pack(part, prefix))
        meta[prefix + "step"] = part.step
        meta[prefix + "picard_iters"] = part.picard_iters
    grid = state.u.grid
    write_container(path, grid.L, grid.N, "checkpoint", arrays, meta)
    logger.debug("Saved checkpoint at step %d to %s.", state.step, path)


def load_checkpoint(
    path: str | pathlib.Path, grid: Grid | None = None
) -> Tuple[PenaltyState | DecomposedState, Dict[str, Any]]:
    """Read a checkpoint written by save_checkpoint.

    Returns:
        State and metadata.
    """
    container = read_container(path)
    if container.kind != "checkpoint":
        raise ValueError(
            f"{path} holds a {container.kind} container, not a checkpoint!"
        )
    stored = container.grid()
    if grid is None:
        grid = stored
    else:
        grid.check_same(stored)
    meta = container.metadata
    if meta.get("decomposed"):
        state = DecomposedState(
            z=_unpack(container.arrays, grid, "z.", meta),
            v=_unpack(container.arrays, grid, "v.", meta),
        )
    else:
        state = _unpack(container.arrays, grid, "", meta)
    return state, meta
