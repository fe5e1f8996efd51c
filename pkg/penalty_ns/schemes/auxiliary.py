"""Auxiliary schemes realizing the splitting u = z + v at the discrete level.

z solves the penalty-projection discretization of the linear stochastic
Stokes problem with z^0 = 0. v solves the same scheme without forcing but with
the nonlinearity B~(v~ + z~, v~ + z~) and v^0 = u0. With shared noise the sum
reproduces the main scheme up to Picard tolerance.
"""

from __future__ import annotations

import logging

from penalty_ns.nonlinear.convection import b_tilde_apply
from penalty_ns.schemes.base_scheme import (
    BaseScheme,
    DecomposedState,
    PenaltyState,
    advance,
    check_growth,
    picard_solve,
    project,
)
from penalty_ns.schemes.linear_solve import penalty_block_solve
from penalty_ns.schemes.params import SchemeParams, SolverOpts
from penalty_ns.spectral.fields import SpectralVector
from penalty_ns.spectral.operators import gradient

logger = logging.getLogger(__name__)


def stokes_penalty_step(
    z_state: PenaltyState,
    params: SchemeParams,
    dW: SpectralVector,
    opts: SolverOpts,
) -> PenaltyState:
    """Penalty-projection step without the nonlinear term (one linear solve)."""
    k, eps = params.k, params.eps
    rhs = z_state.u + dW - gradient(z_state.phi) * k
    z_tilde = penalty_block_solve(rhs, params.nu, k, eps)
    z, xi, pi, pi_tilde = project(z_tilde, z_state.phi, params)
    check_growth(z, z_state.u, dW, opts)
    return advance(z_state, z, xi, pi, z_tilde, pi_tilde, 0)


def deterministic_penalty_step(
    v_state: PenaltyState,
    params: SchemeParams,
    z_tilde: SpectralVector,
    opts: SolverOpts,
) -> PenaltyState:
    """Unforced penalty-projection step for v driven through B~(v~+z~, .).

    Args:
        v_state: State of the v-scheme. Its advector holds v~ + z~ of the
            previous step and is used when params.lagged_advection is set.
        params: Scheme parameters.
        z_tilde: Intermediate velocity of the z-scheme at the same step.
        opts: Picard and blow-up settings.
    """
    k, eps = params.k, params.eps
    rhs = v_state.u - gradient(v_state.phi) * k
    lagged = params.lagged_advection
    advector = v_state.advector

    def update(current: SpectralVector) -> SpectralVector:
        total = current + z_tilde
        adv = advector if lagged and advector is not None else total
        forcing = rhs - b_tilde_apply(adv, total) * k
        return penalty_block_solve(forcing, params.nu, k, eps)

    v_tilde, iterations = picard_solve(update, v_state.u_tilde, opts)
    v, psi, rho, rho_tilde = project(v_tilde, v_state.phi, params)
    check_growth(v, v_state.u, z_tilde, opts)
    return advance(
        v_state,
        v,
        psi,
        rho,
        v_tilde,
        rho_tilde,
        iterations,
        advector=v_tilde + z_tilde,
    )


class StokesPenaltyScheme(BaseScheme):
    """First auxiliary scheme (linear stochastic Stokes, penalized)."""

    tag = "stokes-penalty"
    penalized = True

    def init_state(self, u0: SpectralVector) -> PenaltyState:
        return PenaltyState.initial(u0)

    def _step(self, state: PenaltyState, dW: SpectralVector) -> PenaltyState:
        return stokes_penalty_step(state, self.params, dW, self.opts)


class DecomposedScheme(BaseScheme):
    """Runs the z- and v-schemes side by side and exposes z + v."""

    tag = "decomposed"
    penalized = True

    def init_state(self, u0: SpectralVector) -> DecomposedState:
        z0 = PenaltyState.initial(SpectralVector.zeros(u0.grid))
        v0 = PenaltyState.initial(u0)
        return DecomposedState(z=z0, v=v0)

    def _step(
        self, state: DecomposedState, dW: SpectralVector
    ) -> DecomposedState:
        z = stokes_penalty_step(state.z, self.params, dW, self.opts)
        v = deterministic_penalty_step(
            state.v, self.params, z.u_tilde, self.opts
        )
        return DecomposedState(z=z, v=v)
