"""Solenoidal Q-Wiener noise and level-coupled increment ladders."""

from penalty_ns.noise.increments import (
    WienerIncrements,
    coarsen,
    increment_field,
    sample_increments,
)
from penalty_ns.noise.model import NoiseModel, build_noise_model

__all__ = [
    "NoiseModel",
    "WienerIncrements",
    "build_noise_model",
    "coarsen",
    "increment_field",
    "sample_increments",
]
