"""Time-stepping parameters and nonlinear solver options."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Any, Dict


@dataclass(frozen=True)
class SchemeParams:
    """Physical and discretization parameters of one level.

    Attributes:
        nu: Viscosity.
        T: Final time.
        M: Number of steps; the step is k = T / M.
        epsilon: Penalty parameter used when couple_eps_to_k is off.
        eta: Coupling exponent in (0, 1/2).
        alpha: Projection stabilizer, > 1.
        couple_eps_to_k: Use eps = k^eta instead of epsilon.
        lagged_advection: Advect with the previous intermediate velocity
            (semi-implicit) instead of the current iterate.
    """

    nu: float = 1.0
    T: float = 0.5
    M: int = 64
    epsilon: float = 0.1
    eta: float = 0.4
    alpha: float = 2.0
    couple_eps_to_k: bool = True
    lagged_advection: bool = False

    def __post_init__(self) -> None:
        """Validate parameter ranges."""
        if not self.nu > 0:
            raise ValueError(f"nu must be positive, but it is {self.nu}!")
        if not self.T > 0:
            raise ValueError(f"T must be positive, but it is {self.T}!")
        if self.M < 0:
            raise ValueError(f"M must be >= 0, but it is {self.M}!")
        if not 0 < self.eta < 0.5:
            raise ValueError(f"eta must be in (0, 1/2), but it is {self.eta}!")
        if not self.alpha > 1:
            raise ValueError(f"alpha must be > 1, but it is {self.alpha}!")
        if not self.couple_eps_to_k and not self.epsilon > 0:
            raise ValueError(
                f"epsilon must be positive, but it is {self.epsilon}!"
            )

    @property
    def k(self) -> float:
        """Time step T / M (0 when M = 0)."""
        return self.T / self.M if self.M > 0 else 0.0

    @property
    def eps(self) -> float:
        """Penalty parameter in effect: k^eta when coupled."""
        if self.couple_eps_to_k:
            return self.k**self.eta
        return self.epsilon

    def times(self) -> list[float]:
        """Time levels t_0 = 0, ..., t_M = T."""
        return [ell * self.k for ell in range(self.M + 1)]

    def at_level(self, M: int) -> "SchemeParams":
        """Same parameters with M steps."""
        return dataclasses.replace(self, M=M)

    @classmethod
    def from_config(cls, config: Dict[str, Dict[str, Any]]) -> "SchemeParams":
        """Build from the [scheme] section of a run config."""
        section = config["scheme"]
        names = {f.name for f in dataclasses.fields(cls)}
        return cls(**{key: section[key] for key in names})


@dataclass(frozen=True)
class SolverOpts:
    """Picard iteration and blow-up guard settings.

    Attributes:
        picard_tol: Relative L2 update below which Picard has converged.
        picard_max_iter: Iteration cap.
        divergence_guard: Blow-up is declared when |u^l| exceeds this factor
            times |u^(l-1)| + |dW|.
    """

    picard_tol: float = 1e-11
    picard_max_iter: int = 100
    divergence_guard: float = 1e3

    def __post_init__(self) -> None:
        """Validate solver options."""
        if not self.picard_tol > 0:
            raise ValueError(
                f"picard_tol must be positive, but it is {self.picard_tol}!"
            )
        if self.picard_max_iter < 1:
            raise ValueError(
                f"picard_max_iter must be >= 1, but it is "
                f"{self.picard_max_iter}!"
            )
        if not self.divergence_guard > 1:
            raise ValueError(
                f"divergence_guard must be > 1, but it is "
                f"{self.divergence_guard}!"
            )

    @classmethod
    def from_config(cls, config: Dict[str, Dict[str, Any]]) -> "SolverOpts":
        """Build from the [scheme] section of a run config."""
        section = config["scheme"]
        names = {f.name for f in dataclasses.fields(cls)}
        return cls(**{key: section[key] for key in names})
