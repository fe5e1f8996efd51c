"""Divergence-free implicit Euler schemes used as references."""

from __future__ import annotations

import logging

from penalty_ns.nonlinear.convection import b_tilde_apply
from penalty_ns.schemes.base_scheme import (
    BaseScheme,
    PenaltyState,
    advance,
    check_growth,
    picard_solve,
)
from penalty_ns.schemes.linear_solve import heat_solve
from penalty_ns.schemes.params import SchemeParams, SolverOpts
from penalty_ns.spectral.fields import SpectralScalar, SpectralVector
from penalty_ns.spectral.operators import (
    divergence,
    inv_laplacian,
    leray_project,
)

logger = logging.getLogger(__name__)


def direct_step(
    u_prev: SpectralVector,
    params: SchemeParams,
    dW: SpectralVector,
    opts: SolverOpts,
    advector: SpectralVector | None = None,
) -> tuple[SpectralVector, SpectralScalar, int]:
    """Solve u + nu k (-Laplace) u + k P B~(u, u) = u_prev + dW in H.

    The pressure is recovered from grad p = -(I - P) B~(u, u), that is
    p = -inv_laplacian(div B~(u, u)).

    Args:
        u_prev: Divergence-free velocity of the previous step.
        params: Scheme parameters.
        dW: Noise increment.
        opts: Picard settings.
        advector: Advecting field when params.lagged_advection is set.
            Defaults to u_prev.

    Returns:
        (u, p, picard iterations).
    """
    k, nu = params.k, params.nu
    rhs = u_prev + dW
    if params.lagged_advection:
        lagged = u_prev if advector is None else advector

        def convect(current: SpectralVector) -> SpectralVector:
            return b_tilde_apply(lagged, current)

    else:

        def convect(current: SpectralVector) -> SpectralVector:
            return b_tilde_apply(current, current)

    def update(current: SpectralVector) -> SpectralVector:
        return heat_solve(leray_project(rhs - convect(current) * k), nu, k)

    u, iterations = picard_solve(update, u_prev, opts)
    check_growth(u, u_prev, dW, opts)
    p = -inv_laplacian(divergence(convect(u)))
    return u, p, iterations


def stokes_direct_step(
    u_prev: SpectralVector, params: SchemeParams, dW: SpectralVector
) -> SpectralVector:
    """Divergence-free implicit Euler step of the linear Stokes problem."""
    return heat_solve(leray_project(u_prev + dW), params.nu, params.k)


class DirectScheme(BaseScheme):
    """Direct divergence-free discretization (reference scheme)."""

    tag = "direct"

    def init_state(self, u0: SpectralVector) -> PenaltyState:
        return PenaltyState.initial(u0)

    def _step(self, state: PenaltyState, dW: SpectralVector) -> PenaltyState:
        u, p, iterations = direct_step(
            state.u, self.params, dW, self.opts, state.advector
        )
        return advance(state, u, state.phi, p, u, p, iterations)


class StokesDirectScheme(BaseScheme):
    """Direct divergence-free Stokes scheme; reference of the z-scheme."""

    tag = "stokes-direct"

    def init_state(self, u0: SpectralVector) -> PenaltyState:
        return PenaltyState.initial(u0)

    def _step(self, state: PenaltyState, dW: SpectralVector) -> PenaltyState:
        u = stokes_direct_step(state.u, self.params, dW)
        check_growth(u, state.u, dW, self.opts)
        zero = SpectralScalar.zeros(u.grid)
        return advance(state, u, zero, zero, u, zero, 0)
