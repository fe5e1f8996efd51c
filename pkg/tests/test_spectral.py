"""Tests for the grid, spectral fields and exact operators."""

import math

import numpy as np
import pytest

from penalty_ns.spectral.fields import SpectralScalar, SpectralVector
from penalty_ns.spectral.grid import Grid, GridMismatchError
from penalty_ns.spectral.operators import (
    MeanModeError,
    divergence,
    gradient,
    inner,
    inv_laplacian,
    laplacian,
    leray_project,
    norm,
    project_gradient,
    random_scalar,
    random_vector,
    taylor_green,
)

TOL = 1e-12


def _sine(grid, amplitude=1.0):
    """amplitude * sin(2 pi x / L) as a scalar field."""
    x, _ = grid.base_wavenumber * grid.points
    return SpectralScalar.from_physical(grid, amplitude * np.sin(x))


class TestGrid:
    """Grid validation and wavevector tables."""

    @pytest.mark.parametrize("N", [7, 15, 6])
    def test_rejects_bad_sizes(self, N):
        with pytest.raises(ValueError, match="even and >= 8"):
            Grid(N=N)

    def test_rejects_small_padding(self):
        with pytest.raises(ValueError, match="dealias_pad"):
            Grid(N=16, dealias_pad=1.2)

    def test_rejects_nonpositive_length(self):
        with pytest.raises(ValueError, match="L must be positive"):
            Grid(L=0.0, N=16)

    def test_padded_size_at_least_three_halves(self):
        for N in (8, 16, 18, 32):
            grid = Grid(N=N)
            assert grid.padded_size >= 3 * N / 2
            assert grid.padded_size % 2 == 0

    def test_mask_drops_mean_and_nyquist(self, grid):
        assert not grid.mask[0, 0]
        assert not grid.mask[grid.N // 2, 3]
        assert not grid.mask[3, grid.N // 2]
        assert grid.mask[1, 0]
        assert grid.nyquist_free[0, 0]

    def test_kappa_scales_with_length(self):
        grid = Grid(L=3.0, N=16)
        i, j = grid.index_of(2, -1)
        assert grid.kappa[0, i, j] == pytest.approx(2 * 2 * math.pi / 3.0)
        assert grid.kappa[1, i, j] == pytest.approx(-2 * math.pi / 3.0)

    def test_index_of_unresolved_mode(self, small_grid):
        with pytest.raises(ValueError, match="not resolved"):
            small_grid.index_of(8, 0)


class TestFields:
    """Construction, immutability and arithmetic of spectral fields."""

    def test_physical_roundtrip(self, grid, rng):
        values = random_vector(grid, rng).to_physical()
        back = SpectralVector.from_physical(grid, values).to_physical()
        np.testing.assert_allclose(back, values, atol=1e-13)

    def test_random_fields_are_hermitian(self, grid, rng):
        f = random_scalar(grid, rng)
        idx = (-np.arange(grid.N)) % grid.N
        flipped = f.coeffs[np.ix_(idx, idx)]
        np.testing.assert_allclose(flipped, np.conj(f.coeffs), atol=1e-15)
        assert f.mean_coefficient() == 0.0

    def test_coefficients_are_read_only(self, grid):
        f = SpectralScalar.zeros(grid)
        with pytest.raises(ValueError):
            f.coeffs[1, 1] = 1.0

    def test_nyquist_zeroed_on_construction(self, grid):
        coeffs = np.ones((grid.N, grid.N), dtype=complex)
        f = SpectralScalar(grid, coeffs)
        assert f.coeffs[grid.N // 2, 0] == 0
        assert f.coeffs[0, 0] == 1

    def test_shape_is_checked(self, grid):
        with pytest.raises(ValueError, match="shape"):
            SpectralVector(grid, np.zeros((grid.N, grid.N)))

    def test_grid_mismatch(self, grid, small_grid):
        with pytest.raises(GridMismatchError):
            SpectralScalar.zeros(grid) + SpectralScalar.zeros(small_grid)

    def test_cannot_mix_scalar_and_vector(self, grid):
        with pytest.raises(TypeError):
            SpectralScalar.zeros(grid) + SpectralVector.zeros(grid)

    def test_arithmetic(self, grid, rng):
        u = random_vector(grid, rng)
        v = random_vector(grid, rng)
        w = (u + v) * 2.0 - v / 0.5
        np.testing.assert_allclose(w.coeffs, 2 * u.coeffs, atol=1e-15)
        assert (-u + u).bit_equal(SpectralVector.zeros(grid))


class TestOperators:
    """Exact differential operators and the Leray projection."""

    def test_gradient_of_cosine(self, grid):
        x, y = grid.points
        f = SpectralScalar.from_physical(grid, np.cos(x) * np.cos(2 * y))
        expected = np.stack(
            [-np.sin(x) * np.cos(2 * y), -2 * np.cos(x) * np.sin(2 * y)]
        )
        np.testing.assert_allclose(
            gradient(f).to_physical(), expected, atol=1e-12
        )

    def test_div_grad_is_laplacian(self, grid, rng):
        f = random_scalar(grid, rng)
        lhs = divergence(gradient(f))
        assert norm(lhs - laplacian(f)) <= TOL * norm(laplacian(f))

    def test_inverse_laplacian_of_single_mode(self):
        grid = Grid(L=1.0, N=16)
        x, _ = grid.points
        f = SpectralScalar.from_physical(grid, np.cos(2 * math.pi * x))
        expected = -np.cos(2 * math.pi * x) / (2 * math.pi) ** 2
        np.testing.assert_allclose(
            inv_laplacian(f).to_physical(), expected, atol=1e-15
        )

    def test_inverse_laplacian_roundtrip(self, grid, rng):
        f = random_scalar(grid, rng)
        back = inv_laplacian(laplacian(f))
        assert norm(back - f) <= TOL * norm(f)

    def test_inverse_laplacian_rejects_mean(self, grid):
        x, _ = grid.points
        f = SpectralScalar.from_physical(grid, 1.0 + np.cos(x))
        with pytest.raises(MeanModeError, match="mean"):
            inv_laplacian(f)

    def test_zero_field(self, grid):
        zero = SpectralScalar.zeros(grid)
        assert norm(inv_laplacian(zero)) == 0.0
        assert norm(zero, -1) == 0.0

    def test_leray_projection(self, grid, rng):
        w = random_vector(grid, rng, solenoidal=False)
        pw = leray_project(w)
        assert norm(divergence(pw)) <= TOL * norm(pw, 1)
        assert norm(leray_project(pw) - pw) <= TOL * norm(pw)
        assert abs(inner(w - pw, pw)) <= TOL * norm(w) ** 2
        assert norm(project_gradient(w) - (w - pw)) <= TOL * norm(w)

    def test_leray_kills_gradients(self, grid, rng):
        g = gradient(random_scalar(grid, rng))
        assert norm(leray_project(g)) <= TOL * norm(g)

    def test_taylor_green_is_solenoidal(self, grid):
        u = taylor_green(grid, 0.7)
        assert norm(divergence(u)) <= TOL * norm(u, 1)


class TestNorms:
    """Sobolev, L2 and L4 norms."""

    def test_l2_norm_of_sine(self):
        L = 3.0
        grid = Grid(L=L, N=16)
        f = _sine(grid, 2.0)
        assert norm(f) == pytest.approx(2.0 * L / math.sqrt(2), rel=1e-13)
        assert norm(f, "L2") == norm(f, 0)

    def test_sobolev_norms_of_sine(self):
        L = 3.0
        grid = Grid(L=L, N=16)
        f = _sine(grid)
        kappa = 2 * math.pi / L
        base = L / math.sqrt(2)
        assert norm(f, 1) == pytest.approx(kappa * base, rel=1e-13)
        assert norm(f, "H1") == pytest.approx(kappa * base, rel=1e-13)
        assert norm(f, "H-1") == pytest.approx(base / kappa, rel=1e-13)

    def test_l4_norm_of_sine(self):
        L = 3.0
        grid = Grid(L=L, N=16)
        f = _sine(grid, 1.5)
        expected = 1.5 * (3 * L**2 / 8) ** 0.25
        assert norm(f, "L4") == pytest.approx(expected, rel=1e-12)

    @pytest.mark.parametrize("pad", [1.5, 2.0])
    def test_l4_norm_at_highest_mode(self, pad):
        grid = Grid(N=8, dealias_pad=pad)
        x, y = grid.points
        f = SpectralScalar.from_physical(grid, np.sin(3 * x) * np.cos(3 * y))
        expected = (grid.L**2 * (3 / 8) ** 2) ** 0.25
        assert expected == pytest.approx(1.535, abs=1e-3)
        assert norm(f, "L4") == pytest.approx(expected, rel=1e-12)

    def test_negative_order_needs_mean_zero(self, grid):
        x, _ = grid.points
        f = SpectralScalar.from_physical(grid, 2.0 + np.sin(x))
        with pytest.raises(MeanModeError):
            norm(f, -1)

    def test_unknown_order(self, grid):
        with pytest.raises(ValueError, match="Unknown norm order"):
            norm(SpectralScalar.zeros(grid), "H2")

    def test_dual_norm_identity(self, grid, rng):
        u = random_vector(grid, rng)
        lhs = inner(-inv_laplacian(u), u)
        assert lhs == pytest.approx(norm(u, -1) ** 2, rel=1e-12)

    def test_norm_monotonicity(self, grid, rng):
        f = random_scalar(grid, rng)
        scale = grid.L / (2 * math.pi)
        assert norm(f, -1) <= scale * norm(f) * (1 + 1e-14)
        assert norm(f) <= scale * norm(f, 1) * (1 + 1e-14)

    def test_random_field_amplitude(self, grid, rng):
        u = random_vector(grid, rng, amplitude=0.3)
        assert norm(u) == pytest.approx(0.3, rel=1e-12)
