"""Custom type definition."""

from __future__ import annotations

from typing import Any, Callable, Dict, NewType, Union

import numpy as np

# Complex Fourier coefficients of a scalar field, shape [N, N] in FFT order
ScalarCoeffs = NewType("ScalarCoeffs", np.ndarray)
# Complex Fourier coefficients of a vector field, shape [2, N, N]
VectorCoeffs = NewType("VectorCoeffs", np.ndarray)
# Real samples on a physical grid, shape [..., N, N] or padded [..., P, P]
PhysicalField = NewType("PhysicalField", np.ndarray)
# Brownian increments, shape [num_steps, num_modes, 2] (cos and sin channels)
IncrementArray = NewType("IncrementArray", np.ndarray)

# Norm order: a real Sobolev exponent or the tags "L2" / "L4"
NormOrder = Union[float, int, str]

# Observer hook called once per step with (step, t, state)
StepHook = Callable[[int, float, Any], None]

ConfigDict = Dict[str, Dict[str, Any]]
