"""Tests for the penalty-projection, direct and auxiliary schemes."""

import math

import numpy as np
import pytest

from penalty_ns.noise.increments import increment_field, sample_increments
from penalty_ns.noise.model import build_noise_model
from penalty_ns.schemes.auxiliary import (
    deterministic_penalty_step,
    stokes_penalty_step,
)
from penalty_ns.schemes.base_scheme import (
    BlowUp,
    PenaltyState,
    PicardDiverged,
    SchemeError,
    check_growth,
)
from penalty_ns.schemes.direct import direct_step, stokes_direct_step
from penalty_ns.schemes.linear_solve import heat_solve, penalty_block_solve
from penalty_ns.schemes.params import SchemeParams, SolverOpts
from penalty_ns.schemes.penalty import penalty_step
from penalty_ns.schemes.scheme_util import setup_scheme
from penalty_ns.schemes.trajectory import run_trajectory
from penalty_ns.spectral.fields import SpectralVector
from penalty_ns.spectral.operators import (
    divergence,
    gradient,
    norm,
    random_vector,
    taylor_green,
    taylor_green_pressure,
)

TOL = 1e-12


def _single_mode(grid, n1, n2, values):
    """Real vector field with coefficient `values` at (n1, n2)."""
    coeffs = np.zeros((2, grid.N, grid.N), dtype=complex)
    coeffs[(slice(None),) + grid.index_of(n1, n2)] = values
    coeffs[(slice(None),) + grid.index_of(-n1, -n2)] = np.conj(values)
    return SpectralVector(grid, coeffs)


@pytest.fixture
def noisy_run(small_grid):
    """Main-scheme setup with noise on a 16 x 16 grid."""
    model = build_noise_model(small_grid)
    params = SchemeParams(T=0.2, M=8)
    incs = sample_increments(model, 8, 42, 0, T=params.T)
    u0 = random_vector(small_grid, np.random.default_rng(5))
    return model, params, incs, u0


class TestParams:
    """Parameter validation and the eps-k coupling."""

    def test_coupled_eps(self):
        params = SchemeParams(T=0.5, M=64, eta=0.4)
        assert params.k == 0.5 / 64
        assert params.eps == (0.5 / 64) ** 0.4

    def test_uncoupled_eps(self):
        params = SchemeParams(couple_eps_to_k=False, epsilon=0.3)
        assert params.eps == 0.3

    @pytest.mark.parametrize(
        "kwargs, message",
        [
            ({"alpha": 0.5}, "alpha must be > 1"),
            ({"eta": 0.5}, "eta must be in"),
            ({"eta": 0.0}, "eta must be in"),
            ({"nu": 0.0}, "nu must be positive"),
            ({"M": -1}, "M must be >= 0"),
        ],
    )
    def test_invalid(self, kwargs, message):
        with pytest.raises(ValueError, match=message):
            SchemeParams(**kwargs)

    def test_invalid_solver_opts(self):
        with pytest.raises(ValueError, match="picard_max_iter"):
            SolverOpts(picard_max_iter=0)

    def test_at_level(self):
        params = SchemeParams(T=1.0, M=4).at_level(16)
        assert params.M == 16 and params.k == 1 / 16


class TestLinearSolve:
    """Exact per-mode inversion of the implicit operators."""

    def test_two_by_two_oracle(self, small_grid):
        # kappa = (1, 0), nu = 1, k = 0.01, eps = 0.1
        a, b = 0.3 + 0.1j, -0.2 + 0.05j
        rhs = _single_mode(small_grid, 1, 0, [a, b])
        u = penalty_block_solve(rhs, 1.0, 0.01, 0.1)
        i, j = small_grid.index_of(1, 0)
        assert u.coeffs[0, i, j] == pytest.approx(a / 1.11, rel=1e-14)
        assert u.coeffs[1, i, j] == pytest.approx(b / 1.01, rel=1e-14)

    def test_solves_general_mode(self, grid, rng):
        rhs = random_vector(grid, rng, solenoidal=False)
        nu, k, eps = 0.7, 0.05, 0.2
        u = penalty_block_solve(rhs, nu, k, eps)
        kappa = grid.kappa
        k_dot_u = np.sum(kappa * u.coeffs, axis=0)
        lhs = (1 + nu * k * grid.kappa_sq) * u.coeffs + (k / eps) * (
            kappa * k_dot_u
        )
        np.testing.assert_allclose(lhs, rhs.coeffs * grid.mask, atol=1e-15)

    def test_heat_solve(self, small_grid):
        rhs = _single_mode(small_grid, 2, 1, [0.1, -0.2])
        u = heat_solve(rhs, 1.0, 0.1)
        assert norm(u) == pytest.approx(norm(rhs) / 1.5, rel=1e-14)


class TestPenaltyStep:
    """The main penalty-projection step."""

    def test_linear_single_mode(self, small_grid):
        params = SchemeParams(
            nu=1.0, T=0.01, M=1, epsilon=0.1, couple_eps_to_k=False
        )
        a, b = 0.3 + 0.1j, -0.2 + 0.05j
        dW = _single_mode(small_grid, 1, 0, [a, b])
        zero = SpectralVector.zeros(small_grid)
        state = stokes_penalty_step(
            PenaltyState.initial(zero), params, dW, SolverOpts()
        )
        i, j = small_grid.index_of(1, 0)
        assert state.u_tilde.coeffs[0, i, j] == pytest.approx(a / 1.11)
        assert state.u_tilde.coeffs[1, i, j] == pytest.approx(b / 1.01)
        # The projection removes the longitudinal part along kappa = (1, 0)
        assert abs(state.u.coeffs[0, i, j]) <= 1e-15
        assert state.u.coeffs[1, i, j] == pytest.approx(b / 1.01)
        assert state.p_tilde.coeffs[i, j] == pytest.approx(
            -1j * (a / 1.11) / 0.1
        )

    def test_zero_state_stays_zero(self, small_grid):
        params = SchemeParams(T=0.2, M=4)
        zero = SpectralVector.zeros(small_grid)
        state = PenaltyState.initial(zero)
        for _ in range(4):
            state = penalty_step(state, params, zero, SolverOpts())
        assert norm(state.u) == 0.0 and norm(state.p) == 0.0
        assert state.step == 4

    def test_invariants_with_noise(self, noisy_run):
        model, params, incs, u0 = noisy_run
        traj = run_trajectory("main", params, u0, incs, model=model)
        for row in traj.rows()[1:]:
            assert row.div_residual <= TOL
            assert row.penalty_residual <= TOL
            assert row.picard_iters >= 1

    def test_projection_update(self, noisy_run):
        model, params, incs, u0 = noisy_run
        state = PenaltyState.initial(u0)
        dW = increment_field(model, incs, params.M, 1)
        new = penalty_step(state, params, dW, SolverOpts())
        ak = params.alpha * params.k
        delta = new.phi - state.phi
        expected_u = new.u_tilde - gradient(delta) * ak
        assert norm(new.u - expected_u) <= TOL * norm(new.u)
        expected_p = new.p_tilde + new.phi + delta * params.alpha
        assert norm(new.p - expected_p) <= TOL * norm(new.p)
        residual = divergence(new.u_tilde) + new.p_tilde * params.eps
        assert norm(residual) <= TOL * norm(new.p_tilde)

    def test_zero_noise_energy_decays(self, small_grid):
        params = SchemeParams(T=0.5, M=16)
        u0 = random_vector(small_grid, np.random.default_rng(3))
        traj = run_trajectory("main", params, u0, None)
        energies = [row.energy for row in traj.rows()]
        for before, after in zip(energies, energies[1:]):
            assert after <= before * (1 + 1e-14)

    def test_lagged_advection(self, noisy_run):
        model, params, incs, u0 = noisy_run
        lagged = SchemeParams(T=params.T, M=params.M, lagged_advection=True)
        traj = run_trajectory("main", lagged, u0, incs, model=model)
        full = run_trajectory("main", params, u0, incs, model=model)
        for row in traj.rows()[1:]:
            assert row.div_residual <= TOL
        gap = norm(traj.velocity(params.M) - full.velocity(params.M))
        assert 0 < gap < 0.1 * norm(full.velocity(params.M))


class TestDirectStep:
    """Divergence-free reference scheme."""

    def test_taylor_green_step(self, small_grid):
        params = SchemeParams(nu=1.0, T=0.5, M=8)
        a = 0.8
        u0 = taylor_green(small_grid, a)
        zero = SpectralVector.zeros(small_grid)
        u, p, iterations = direct_step(u0, params, zero, SolverOpts())
        a1 = a / (1 + 2 * params.nu * params.k)
        expected = taylor_green(small_grid, a1)
        assert norm(u - expected) <= 1e-12 * norm(expected)
        p_oracle = taylor_green_pressure(small_grid, a1)
        assert norm(p - p_oracle) <= 1e-10 * norm(p_oracle)
        assert iterations <= 3

    def test_stokes_direct_is_projected_heat_step(self, small_grid, rng):
        params = SchemeParams(T=0.1, M=1)
        u0 = random_vector(small_grid, rng)
        zero = SpectralVector.zeros(small_grid)
        u = stokes_direct_step(u0, params, zero)
        expected = heat_solve(u0, params.nu, params.k)
        assert norm(u - expected) <= TOL * norm(expected)

    def test_direct_solution_is_solenoidal(self, noisy_run):
        model, params, incs, u0 = noisy_run
        traj = run_trajectory("direct", params, u0, incs, model=model)
        for row in traj.rows():
            assert row.div_residual <= TOL


class TestAuxiliarySchemes:
    """z/v splitting of the main scheme."""

    def test_deterministic_step_from_zero(self, small_grid):
        zero = SpectralVector.zeros(small_grid)
        state = deterministic_penalty_step(
            PenaltyState.initial(zero), SchemeParams(M=4), zero, SolverOpts()
        )
        assert norm(state.u) == 0.0

    def test_stokes_penalty_without_noise(self, small_grid):
        params = SchemeParams(T=0.2, M=4)
        zero = SpectralVector.zeros(small_grid)
        traj = run_trajectory("stokes-penalty", params, zero, None)
        assert all(row.energy == 0.0 for row in traj.rows())

    @pytest.mark.parametrize("lagged", [False, True])
    def test_decomposition_identity(self, noisy_run, lagged):
        model, params, incs, u0 = noisy_run
        params = SchemeParams(T=params.T, M=params.M, lagged_advection=lagged)
        main = run_trajectory("main", params, u0, incs, model=model)
        split = run_trajectory("decomposed", params, u0, incs, model=model)
        state = split.final_state
        scale = norm(state.z.u) + norm(state.v.u)
        assert norm(main.final_state.u - state.u) <= 1e-9 * scale
        assert norm(main.final_state.p - state.p) <= 1e-8 * (
            norm(state.z.p) + norm(state.v.p)
        )


class TestFailures:
    """Scheme errors carry the failing step."""

    def test_picard_cap(self, noisy_run):
        model, params, incs, u0 = noisy_run
        scheme = setup_scheme("main", params, SolverOpts(picard_max_iter=1))
        dW = increment_field(model, incs, params.M, 1)
        with pytest.raises(PicardDiverged) as info:
            scheme.step(scheme.init_state(u0), dW)
        assert info.value.step == 1
        assert str(info.value).startswith("step 1: ")

    def test_blow_up_guard(self, small_grid, rng):
        u = random_vector(small_grid, rng)
        with pytest.raises(BlowUp, match="exceeds"):
            check_growth(u * 1e4, u, None, SolverOpts())
        with pytest.raises(BlowUp, match="not finite"):
            check_growth(u * math.nan, u, None, SolverOpts())

    def test_scheme_error_message(self):
        assert str(SchemeError("boom", step=3)) == "step 3: boom"
        assert str(SchemeError("boom")) == "boom"

    def test_unknown_scheme(self):
        with pytest.raises(ValueError, match="Unknown scheme"):
            setup_scheme("implicit", SchemeParams())
