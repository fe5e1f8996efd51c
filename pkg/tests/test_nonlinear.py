"""Tests for the dealiased convective operators."""

import threading

import numpy as np
import pytest

from penalty_ns.nonlinear.constants import (
    estimate_ladyzhenskaya_constant,
    estimate_trilinear_constant,
)
from penalty_ns.nonlinear.convection import b_apply, b_tilde_apply, trilinear
from penalty_ns.nonlinear.workspace import get_workspace
from penalty_ns.spectral.fields import SpectralVector
from penalty_ns.spectral.grid import GridMismatchError
from penalty_ns.spectral.operators import (
    inner,
    leray_project,
    norm,
    random_vector,
    taylor_green,
)

TOL = 1e-12


def _random_triple(grid, rng):
    return tuple(
        random_vector(grid, rng, solenoidal=False) for _ in range(3)
    )


class TestConvection:
    """B, B~ and the trilinear form."""

    def test_zero_advecting_field(self, grid, rng):
        v = random_vector(grid, rng)
        zero = SpectralVector.zeros(grid)
        assert norm(b_tilde_apply(zero, v)) == 0.0

    def test_solenoidal_advector(self, grid, rng):
        u = random_vector(grid, rng)
        v = random_vector(grid, rng)
        b = b_apply(u, v)
        assert norm(b_tilde_apply(u, v) - b) <= TOL * norm(b)

    def test_single_mode_product(self, grid):
        # u = (1, 0) sin(y) advects v = (sin x, 0): [u.grad] v = sin y cos x
        x, y = grid.points
        zero = np.zeros_like(x)
        u = SpectralVector.from_physical(grid, np.stack([np.sin(y), zero]))
        v = SpectralVector.from_physical(grid, np.stack([np.sin(x), zero]))
        expected = np.stack([np.sin(y) * np.cos(x), zero])
        np.testing.assert_allclose(
            b_apply(u, v).to_physical(), expected, atol=1e-13
        )

    def test_taylor_green_advection_is_gradient(self, grid):
        u = taylor_green(grid, 1.3)
        b = b_tilde_apply(u, u)
        assert norm(b) > 0
        assert norm(leray_project(b)) <= TOL * norm(b)

    def test_trilinear_vanishes_on_diagonal(self, grid, rng):
        for _ in range(100):
            u, v, _ = _random_triple(grid, rng)
            scale = norm(u, 1) * norm(v, 1) ** 2
            assert abs(trilinear(u, v, v)) <= TOL * scale

    def test_trilinear_is_skew(self, grid, rng):
        for _ in range(20):
            u, v, w = _random_triple(grid, rng)
            scale = norm(u, 1) * norm(v, 1) * norm(w, 1)
            lhs = trilinear(u, v, w) + trilinear(u, w, v)
            assert abs(lhs) <= TOL * scale

    def test_trilinear_matches_inner_product(self, grid, rng):
        u, v, w = _random_triple(grid, rng)
        assert trilinear(u, v, w) == inner(b_tilde_apply(u, v), w)

    def test_grid_mismatch(self, grid, small_grid, rng):
        with pytest.raises(GridMismatchError):
            b_tilde_apply(
                random_vector(grid, rng), random_vector(small_grid, rng)
            )


class TestWorkspace:
    """Per-thread padded workspaces."""

    def test_one_workspace_per_thread(self, grid):
        main = get_workspace(grid)
        assert get_workspace(grid) is main
        seen = []
        thread = threading.Thread(
            target=lambda: seen.append(get_workspace(grid))
        )
        thread.start()
        thread.join()
        assert seen[0] is not main
        assert seen[0].size == main.size == grid.padded_size


class TestConstants:
    """Brute-force embedding constants."""

    def test_trilinear_constant(self, small_grid, rng):
        estimate = estimate_trilinear_constant(small_grid, rng, trials=50)
        assert estimate.trials == 50
        assert 0 < estimate.value < np.inf
        assert np.all(estimate.ratios <= estimate.value)
        for _ in range(5):
            u, v, w = _random_triple(small_grid, rng)
            bound = 2 * estimate.value * norm(u, 1) * norm(v, 1) * norm(w, 1)
            assert abs(trilinear(u, v, w)) <= bound

    def test_ladyzhenskaya_constant(self, small_grid, rng):
        estimate = estimate_ladyzhenskaya_constant(small_grid, rng, trials=50)
        assert 0 < estimate.value < np.inf
        assert estimate.value == estimate.ratios.max()
