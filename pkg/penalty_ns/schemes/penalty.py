"""Main penalty-projection scheme.

Each step:
    1. Solve u~ + nu k (-Laplace) u~ + k B~(u~, u~) - (k/eps) grad div u~
       = u^(l-1) + dW - k grad phi^(l-1) by Picard iteration with the linear
       part inverted exactly per mode; p~ = -div u~ / eps.
    2. Laplace phi^l = Laplace phi^(l-1) + div u~ / (alpha k).
    3. u^l = u~ - alpha k grad(phi^l - phi^(l-1)) and
       p^l = p~ + phi^l + alpha (phi^l - phi^(l-1)).
"""

from __future__ import annotations

import logging

from penalty_ns.nonlinear.convection import b_tilde_apply
from penalty_ns.schemes.base_scheme import (
    BaseScheme,
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


def penalty_step(
    state: PenaltyState,
    params: SchemeParams,
    dW: SpectralVector,
    opts: SolverOpts,
) -> PenaltyState:
    """One step of the main penalty-projection algorithm.

    Raises:
        PicardDiverged: Step 1 did not converge.
        BlowUp: The new velocity tripped the divergence guard.
    """
    k, eps = params.k, params.eps
    rhs = state.u + dW - gradient(state.phi) * k

    if params.lagged_advection:
        advector = state.advector if state.advector is not None else state.u

        def update(current: SpectralVector) -> SpectralVector:
            forcing = rhs - b_tilde_apply(advector, current) * k
            return penalty_block_solve(forcing, params.nu, k, eps)

    else:

        def update(current: SpectralVector) -> SpectralVector:
            forcing = rhs - b_tilde_apply(current, current) * k
            return penalty_block_solve(forcing, params.nu, k, eps)

    u_tilde, iterations = picard_solve(update, state.u_tilde, opts)
    u, phi, p, p_tilde = project(u_tilde, state.phi, params)
    check_growth(u, state.u, dW, opts)
    return advance(state, u, phi, p, u_tilde, p_tilde, iterations)


class MainScheme(BaseScheme):
    """Penalty-projection scheme with the skew-symmetric nonlinearity."""

    tag = "main"
    penalized = True

    def init_state(self, u0: SpectralVector) -> PenaltyState:
        return PenaltyState.initial(u0)

    def _step(self, state: PenaltyState, dW: SpectralVector) -> PenaltyState:
        return penalty_step(state, self.params, dW, self.opts)
