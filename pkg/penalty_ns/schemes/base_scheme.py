"""Base scheme class, scheme states and shared step machinery."""

from __future__ import annotations

import abc
import logging
import math
from dataclasses import dataclass, replace
from typing import Callable

from penalty_ns.schemes.params import SchemeParams, SolverOpts
from penalty_ns.spectral.fields import SpectralScalar, SpectralVector
from penalty_ns.spectral.operators import (
    divergence,
    gradient,
    inv_laplacian,
    leray_project,
    norm,
)

logger = logging.getLogger(__name__)

# Floor for relative residual denominators
_TINY = 1e-30


class SchemeError(RuntimeError):
    """A time step failed. step is the 1-based index of the failing step."""

    def __init__(self, message: str, step: int | None = None) -> None:
        """Initialize SchemeError."""
        super().__init__(message)
        self.step = step

    def __str__(self) -> str:
        base = super().__str__()
        if self.step is None:
            return base
        return f"step {self.step}: {base}"


class PicardDiverged(SchemeError):
    """Picard iteration failed to converge."""


class BlowUp(SchemeError):
    """The velocity became non-finite or grew past the divergence guard."""


@dataclass(frozen=True)
class PenaltyState:
    """State after step `step` of a scheme.

    Attributes:
        u: End-of-step (projected) velocity.
        phi: Accumulated projection potential.
        p: End-of-step pressure.
        u_tilde: Last intermediate velocity.
        p_tilde: Last intermediate pressure, -div u_tilde / eps.
        step: Step index (0 for the initial state).
        picard_iters: Picard iterations used by the last step.
        advector: Advecting field for lagged advection.
    """

    u: SpectralVector
    phi: SpectralScalar
    p: SpectralScalar
    u_tilde: SpectralVector
    p_tilde: SpectralScalar
    step: int = 0
    picard_iters: int = 0
    advector: SpectralVector | None = None

    @classmethod
    def initial(cls, u0: SpectralVector) -> "PenaltyState":
        """State at l = 0 with phi^0 = p^0 = 0 and u_tilde^0 = u0."""
        zero = SpectralScalar.zeros(u0.grid)
        return cls(
            u=u0,
            phi=zero,
            p=zero,
            u_tilde=u0,
            p_tilde=zero,
            step=0,
            picard_iters=0,
            advector=u0,
        )


@dataclass(frozen=True)
class DecomposedState:
    """Pair of auxiliary states z (linear stochastic) and v (nonlinear)."""

    z: PenaltyState
    v: PenaltyState

    @property
    def step(self) -> int:
        return self.v.step

    @property
    def picard_iters(self) -> int:
        return self.v.picard_iters

    @property
    def u(self) -> SpectralVector:
        return self.z.u + self.v.u

    @property
    def phi(self) -> SpectralScalar:
        return self.z.phi + self.v.phi

    @property
    def p(self) -> SpectralScalar:
        return self.z.p + self.v.p

    @property
    def u_tilde(self) -> SpectralVector:
        return self.z.u_tilde + self.v.u_tilde

    @property
    def p_tilde(self) -> SpectralScalar:
        return self.z.p_tilde + self.v.p_tilde


# =========================================================================== #
#                             Shared step pieces                              #
# =========================================================================== #


def picard_solve(
    update: Callable[[SpectralVector], SpectralVector],
    guess: SpectralVector,
    opts: SolverOpts,
) -> tuple[SpectralVector, int]:
    """Fixed-point iteration x <- update(x) from guess.

    Converged when |x_new - x| <= picard_tol |x_new| in L2.

    Raises:
        PicardDiverged: The update grew for 3 consecutive iterations, an
            iterate became non-finite, or picard_max_iter was reached.
    """
    current = guess
    last_change = math.inf
    growth = 0
    for iteration in range(1, opts.picard_max_iter + 1):
        new = update(current)
        if not new.is_finite():
            raise PicardDiverged(
                f"Picard iterate {iteration} is not finite!"
            )
        change = norm(new - current)
        size = norm(new)
        if change <= opts.picard_tol * size:
            return new, iteration
        growth = growth + 1 if change > last_change else 0
        if growth >= 3:
            raise PicardDiverged(
                f"Picard update grew for 3 consecutive iterations "
                f"(last relative update {change / max(size, _TINY):.3e})!"
            )
        last_change = change
        current = new
    raise PicardDiverged(
        f"Picard did not converge in {opts.picard_max_iter} iterations "
        f"(last relative update {change / max(size, _TINY):.3e})!"
    )


def project(
    u_tilde: SpectralVector,
    phi_prev: SpectralScalar,
    params: SchemeParams,
) -> tuple[SpectralVector, SpectralScalar, SpectralScalar, SpectralScalar]:
    """Penalty pressure, potential update and projection of u_tilde.

    Returns:
        (u, phi, p, p_tilde) with p_tilde = -div u_tilde / eps,
        Laplace phi = Laplace phi_prev + div u_tilde / (alpha k),
        u = u_tilde - alpha k grad(phi - phi_prev) and
        p = p_tilde + phi + alpha (phi - phi_prev).
    """
    ak = params.alpha * params.k
    div_tilde = divergence(u_tilde)
    p_tilde = div_tilde * (-1.0 / params.eps)
    delta = inv_laplacian(div_tilde) * (1.0 / ak)
    phi = phi_prev + delta
    u = u_tilde - gradient(delta) * ak
    p = p_tilde + phi + delta * params.alpha
    return u, phi, p, p_tilde


def check_growth(
    u: SpectralVector,
    u_prev: SpectralVector,
    dW: SpectralVector | None,
    opts: SolverOpts,
) -> None:
    """Raise BlowUp if u is non-finite or grew past the divergence guard."""
    size = norm(u)
    if not math.isfinite(size):
        raise BlowUp("Velocity is not finite!")
    reference = norm(u_prev) + (norm(dW) if dW is not None else 0.0)
    if size > opts.divergence_guard * reference:
        raise BlowUp(
            f"|u| = {size:.3e} exceeds {opts.divergence_guard:g} x "
            f"(|u_prev| + |dW|) = {reference:.3e}!"
        )


def divergence_residual(u: SpectralVector) -> float:
    """|div u| / |u|_1."""
    return norm(divergence(u)) / max(norm(u, 1), _TINY)


def penalty_residual(
    u_tilde: SpectralVector, p_tilde: SpectralScalar, eps: float
) -> float:
    """|div u_tilde + eps p_tilde| / |p_tilde|."""
    residual = divergence(u_tilde) + p_tilde * eps
    return norm(residual) / max(norm(p_tilde), _TINY)


def ensure_solenoidal(u0: SpectralVector, tol: float) -> SpectralVector:
    """Leray-project u0 with a warning if its divergence is not negligible."""
    residual = divergence_residual(u0)
    if residual > tol:
        logger.warning(
            "Initial velocity has relative divergence %.3e; projecting it.",
            residual,
        )
        return leray_project(u0)
    return u0


# =========================================================================== #
#                                 Base class                                  #
# =========================================================================== #


class BaseScheme(abc.ABC):
    """Base class of all time-stepping schemes.

    Subclasses implement init_state() and _step(). step() attaches the step
    index to any SchemeError.
    """

    tag: str = "base"
    # Whether the scheme has a penalty pair (u_tilde, p_tilde)
    penalized: bool = False
    # Whether initial data must be divergence-free
    needs_solenoidal_init: bool = True

    def __init__(self, params: SchemeParams, opts: SolverOpts) -> None:
        """Initialize BaseScheme.

        Args:
            params: Scheme parameters of the level being run.
            opts: Picard and blow-up settings.
        """
        self.params = params
        self.opts = opts

    @abc.abstractmethod
    def init_state(self, u0: SpectralVector):
        """State at l = 0 built from the initial velocity."""
        raise NotImplementedError("init_state() must be implemented!")

    @abc.abstractmethod
    def _step(self, state, dW: SpectralVector):
        """Advance one step."""
        raise NotImplementedError("_step() must be implemented!")

    def step(self, state, dW: SpectralVector):
        """Advance state by one step driven by the noise increment dW."""
        try:
            return self._step(state, dW)
        except SchemeError as err:
            if err.step is None:
                err.step = state.step + 1
            raise

    def with_params(self, params: SchemeParams) -> "BaseScheme":
        """Same scheme class and options at other parameters."""
        return type(self)(params, self.opts)


def advance(
    state: PenaltyState,
    u: SpectralVector,
    phi: SpectralScalar,
    p: SpectralScalar,
    u_tilde: SpectralVector,
    p_tilde: SpectralScalar,
    iterations: int,
    advector: SpectralVector | None = None,
) -> PenaltyState:
    """Next state after state."""
    return replace(
        state,
        u=u,
        phi=phi,
        p=p,
        u_tilde=u_tilde,
        p_tilde=p_tilde,
        step=state.step + 1,
        picard_iters=iterations,
        advector=u_tilde if advector is None else advector,
    )
