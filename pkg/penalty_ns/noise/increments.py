"""Reproducible, level-coupled Brownian increments for the noise model.

Increments are drawn once at the finest level and summed upward. Each
(mode, channel) pair owns an independent Philox substream keyed by the path
stream and the wavevector, so ladders do not depend on thread count or on
the order in which modes are generated. Every draw is rounded to a multiple
of INCREMENT_QUANTUM, which makes all block sums exact in float64 and hence
independent of summation order.
"""

from __future__ import annotations

import logging
import math
import pathlib
from dataclasses import dataclass, replace

import numpy as np

from penalty_ns.hparams import INCREMENT_QUANTUM
from penalty_ns.noise.model import NoiseModel
from penalty_ns.spectral.fields import SpectralVector
from penalty_ns.spectral.snapshot import read_container, write_container
from penalty_ns.utils.types import IncrementArray

logger = logging.getLogger(__name__)

_MASK64 = (1 << 64) - 1
# Offset that maps signed wavenumbers to nonnegative integers
_MODE_OFFSET = 1 << 20


def mix64(value: int) -> int:
    """64-bit xor-shift-multiply finalizer."""
    z = value & _MASK64
    z ^= z >> 30
    z = (z * 0xBF58476D1CE4E5B9) & _MASK64
    z ^= z >> 27
    z = (z * 0x94D049BB133111EB) & _MASK64
    z ^= z >> 31
    return z


def path_stream(base_seed: int, path_index: int) -> int:
    """Stream key mix64(base_seed XOR mix64(path_index))."""
    return mix64((base_seed & _MASK64) ^ mix64(path_index))


def substream_id(n1: int, n2: int, channel: int) -> int:
    """Key of the substream owned by wavevector (n1, n2) and one channel."""
    code = (n1 + _MODE_OFFSET) * (1 << 21) + (n2 + _MODE_OFFSET)
    return mix64(code * 2 + channel)


def substream(
    stream: int, n1: int, n2: int, channel: int
) -> np.random.Generator:
    """Counter-based generator for one (mode, channel) pair of a path."""
    key = np.array([stream, substream_id(n1, n2, channel)], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def quantize(values: np.ndarray) -> np.ndarray:
    """Round to the nearest multiple of INCREMENT_QUANTUM."""
    return np.rint(values / INCREMENT_QUANTUM) * INCREMENT_QUANTUM


@dataclass(frozen=True, eq=False)
class WienerIncrements:
    """Brownian increment ladder of one noise path at one level.

    Attributes:
        increments: Standard Brownian increments, shape [M, K, 2]. Each entry
            has variance k; the noise field multiplies it by sqrt(q_n).
        T: Final time.
        base_seed: Seed of the study.
        path_index: Path number within the study.
        M_fine: Number of steps the ladder was sampled with.
        factor: Refinement factor m relative to the sampled ladder.
        J: Mode cutoff of the noise model used.
        gamma: Decay exponent of the noise model used.
    """

    increments: IncrementArray
    T: float
    base_seed: int
    path_index: int
    M_fine: int
    factor: int = 1
    J: int = 0
    gamma: float = 0.0

    @property
    def M(self) -> int:
        """Number of steps at this level."""
        return self.increments.shape[0]

    @property
    def k(self) -> float:
        """Step size of this level."""
        return self.T / self.M if self.M > 0 else 0.0

    @property
    def coupling_key(self) -> tuple[int, int, int, float]:
        """Identifies the driving path; equal keys mean coupled ladders."""
        return (self.base_seed, self.path_index, self.M_fine, self.T)

    def total(self) -> np.ndarray:
        """W(T) - W(0) per mode and channel."""
        return self.increments.sum(axis=0)

    def check_model(self, model: NoiseModel) -> None:
        """Raise ValueError if the ladder was not built for model."""
        if self.increments.shape[1] != model.num_modes or (
            self.J and (self.J, self.gamma) != (model.J, model.gamma)
        ):
            raise ValueError(
                f"Increments (J={self.J}, gamma={self.gamma}, "
                f"{self.increments.shape[1]} modes) do not match the noise "
                f"model (J={model.J}, gamma={model.gamma}, "
                f"{model.num_modes} modes)!"
            )


def sample_increments(
    model: NoiseModel,
    M_fine: int,
    base_seed: int,
    path_index: int,
    T: float = 1.0,
) -> WienerIncrements:
    """Sample the fine-level increment ladder of one path.

    Args:
        model: Noise model; only the list of modes is used.
        M_fine: Number of fine steps.
        base_seed: 64-bit study seed.
        path_index: Path number.
        T: Final time; the fine step is T / M_fine. T = 0 gives zeros.

    Returns:
        Increments of shape [M_fine, K, 2] with variance T / M_fine.
    """
    if M_fine < 1:
        raise ValueError(f"M_fine must be >= 1, but it is {M_fine}!")
    if T < 0:
        raise ValueError(f"T must be >= 0, but it is {T}!")
    k_fine = T / M_fine
    stream = path_stream(base_seed, path_index)
    draws = np.empty((M_fine, model.num_modes, 2))
    for i, (n1, n2) in enumerate(model.modes):
        for channel in (0, 1):
            rng = substream(stream, int(n1), int(n2), channel)
            draws[:, i, channel] = rng.standard_normal(M_fine)
    increments = quantize(draws * math.sqrt(k_fine))
    increments.setflags(write=False)
    logger.debug(
        "Sampled %d x %d increments for path %d (seed %d).",
        M_fine,
        model.num_modes,
        path_index,
        base_seed,
    )
    return WienerIncrements(
        increments=IncrementArray(increments),
        T=float(T),
        base_seed=int(base_seed),
        path_index=int(path_index),
        M_fine=int(M_fine),
        factor=1,
        J=model.J,
        gamma=model.gamma,
    )


def zero_increments(model: NoiseModel, M: int, T: float) -> WienerIncrements:
    """Noise-free ladder with M steps."""
    increments = np.zeros((M, model.num_modes, 2))
    increments.setflags(write=False)
    return WienerIncrements(
        increments=IncrementArray(increments),
        T=float(T),
        base_seed=0,
        path_index=-1,
        M_fine=int(M),
        J=model.J,
        gamma=model.gamma,
    )


def coarsen(incs: WienerIncrements, factor: int) -> WienerIncrements:
    """Sum consecutive blocks of factor increments.

    Raises:
        ValueError: factor does not divide the number of steps.
    """
    if factor < 1 or incs.M % factor != 0:
        raise ValueError(
            f"Coarsening factor {factor} does not divide M={incs.M}!"
        )
    if factor == 1:
        return incs
    blocks = incs.increments.reshape(
        (incs.M // factor, factor) + incs.increments.shape[1:]
    )
    coarse = blocks.sum(axis=1)
    coarse.setflags(write=False)
    return replace(
        incs,
        increments=IncrementArray(coarse),
        factor=incs.factor * factor,
    )


def to_level(incs: WienerIncrements, M: int) -> WienerIncrements:
    """Coarsen a ladder to M steps."""
    if M < 1 or incs.M % M != 0:
        raise ValueError(f"Level M={M} does not divide M={incs.M}!")
    return coarsen(incs, incs.M // M)


def increment_field(
    model: NoiseModel, incs: WienerIncrements, level: int, ell: int
) -> SpectralVector:
    """Noise increment Delta_ell W of a level with `level` steps.

    Args:
        model: Noise model the ladder was sampled for.
        incs: Increment ladder (fine or already coarsened).
        level: Number of steps M of the target level; must divide incs.M.
        ell: Step index in 1..level.

    Raises:
        IndexError: ell out of range.
    """
    incs.check_model(model)
    if level < 1 or incs.M % level != 0:
        raise ValueError(f"Level M={level} does not divide M={incs.M}!")
    if not 1 <= ell <= level:
        raise IndexError(f"Step {ell} is outside 1..{level}!")
    m = incs.M // level
    block = incs.increments[(ell - 1) * m : ell * m]
    return model.draws_to_field(block.sum(axis=0))


def save_increments(
    path: str | pathlib.Path, incs: WienerIncrements, model: NoiseModel
) -> None:
    """Persist a ladder with its seeds and model parameters."""
    write_container(
        path,
        model.grid.L,
        model.grid.N,
        "increments",
        {
            "increments": np.asarray(incs.increments, dtype=float),
            "modes": np.asarray(model.modes, dtype=np.int64),
        },
        {
            "base_seed": incs.base_seed,
            "path_index": incs.path_index,
            "M_fine": incs.M_fine,
            "factor": incs.factor,
            "T": incs.T,
            "J": model.J,
            "gamma": model.gamma,
        },
    )


def load_increments(path: str | pathlib.Path) -> WienerIncrements:
    """Load a ladder written by save_increments."""
    container = read_container(path)
    if container.kind != "increments":
        raise ValueError(
            f"{path} holds a {container.kind} container, not increments!"
        )
    meta = container.metadata
    increments = container.arrays["increments"]
    increments.setflags(write=False)
    return WienerIncrements(
        increments=IncrementArray(increments),
        T=float(meta["T"]),
        base_seed=int(meta["base_seed"]),
        path_index=int(meta["path_index"]),
        M_fine=int(meta["M_fine"]),
        factor=int(meta["factor"]),
        J=int(meta["J"]),
        gamma=float(meta["gamma"]),
    )
