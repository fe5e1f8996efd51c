"""Tests for the Monte Carlo studies and the validation runs."""

import math

import numpy as np
import pytest

from penalty_ns.experiments import study as study_lib
from penalty_ns.experiments.taylor_green import run_taylor_green
from penalty_ns.schemes.params import SchemeParams
from penalty_ns.schemes.trajectory import run_trajectory
from penalty_ns.spectral.operators import norm, random_vector
from penalty_ns.utils.config import default_config, parse_config


class TestSetup:
    """Grid, noise and initial data from the config."""

    def test_reference_cadence(self):
        assert study_lib.reference_cadence(16, [2, 4, 8]) == 2
        assert study_lib.reference_cadence(1024, [16, 32, 64, 128]) == 8
        assert study_lib.reference_cadence(12, [3, 4]) == 1

    def test_initial_velocity(self, small_grid):
        zero = study_lib.initial_velocity(small_grid, "zero", 1.0, 0, 0)
        assert norm(zero) == 0.0
        first = study_lib.initial_velocity(small_grid, "random", 2.0, 7, 3)
        again = study_lib.initial_velocity(small_grid, "random", 2.0, 7, 3)
        other = study_lib.initial_velocity(small_grid, "random", 2.0, 7, 4)
        assert first.bit_equal(again) and not first.bit_equal(other)
        assert norm(first) == pytest.approx(2.0, rel=1e-12)

    def test_unknown_initial_condition(self, small_grid):
        with pytest.raises(ValueError, match="Unknown initial condition"):
            study_lib.initial_velocity(small_grid, "vortex", 1.0, 0, 0)

    def test_setup_from_config(self, small_config):
        grid = study_lib.setup_grid(small_config)
        model = study_lib.setup_noise(small_config, grid)
        assert grid.N == 16
        assert model.grid is grid


class TestConvergenceStudy:
    """run_mc_study on a small grid."""

    def test_reports_and_rates(self, small_config):
        result = study_lib.run_mc_study(small_config, progress=False)
        assert [r.level for r in result.reports] == [2, 4, 8]
        assert all(len(r.records) == 2 for r in result.reports)
        assert not any(r.blew_up.any() for r in result.reports)
        assert {rate.response for rate in result.rates} == {
            "mean_tEM",
            "mean_EM",
        }
        assert len(result.exceedance) == 3
        assert result.exceedance[0].C == pytest.approx(
            np.median(result.reports[0].values("em"))
        )
        assert result.sample_sets == [] and result.z_reports == []
        rows = result.error_rows()
        assert [(row["level"], row["path"]) for row in rows] == [
            (M, p) for M in (2, 4, 8) for p in (0, 1)
        ]

    def test_error_shrinks_with_epsilon(self, make_config):
        means = []
        for eps in (0.1, 0.01, 0.001):
            config = make_config(
                "study.levels=[8]",
                "study.M_ref=8",
                "study.paths=1",
                "scheme.couple_eps_to_k=False",
                f"scheme.epsilon={eps}",
            )
            result = study_lib.run_mc_study(config, progress=False)
            assert result.rates == []
            means.append(result.reports[0].finite_mean("em"))
        assert all(em > 0 for em in means)
        assert means[0] > means[1] > means[2]

    def test_deterministic(self, small_config):
        first = study_lib.run_mc_study(small_config, progress=False)
        second = study_lib.run_mc_study(small_config, progress=False)
        assert first.error_rows() == second.error_rows()

    def test_failed_paths_are_blow_ups(self, make_config):
        config = make_config("scheme.picard_max_iter=1")
        result = study_lib.run_mc_study(config, progress=False)
        assert all(r.blew_up.all() for r in result.reports)
        assert all(item.fraction == 1.0 for item in result.exceedance)
        assert result.rates == []

    def test_sample_sets(self, make_config):
        config = make_config("study.sample_sets=True")
        result = study_lib.run_mc_study(config, progress=False)
        assert [s.level for s in result.sample_sets] == [2, 4, 8]
        assert [r.level for r in result.z_reports] == [2, 4, 8]
        for stats in result.sample_sets:
            assert all(0.0 <= c <= 1.0 for c in stats.complement)
            assert stats.in1.shape == (2,)

    def test_z_study(self, small_config):
        reports, rates = study_lib.run_z_study(small_config, progress=False)
        assert [r.level for r in reports] == [2, 4, 8]
        assert not any(r.blew_up.any() for r in reports)
        assert all(math.isfinite(r.finite_mean("em")) for r in reports)
        assert {rate.response for rate in rates} <= {
            "z_velocity",
            "z_pressure",
        }


class TestValidationRuns:
    """Stability sweep, decomposition, noise suite and Taylor-Green."""

    def test_stability_sweep(self, small_config):
        result = study_lib.run_stability_sweep(small_config, progress=False)
        assert [lvl.level for lvl in result.levels] == [2, 4, 8]
        assert set(result.spread) == set(study_lib.STABILITY_QUANTITIES)
        for lvl in result.levels:
            assert lvl.blow_ups == 0
            row = lvl.as_row()
            assert row["max_energy"] > 0
            assert "pressure_sum_stderr" in row

    def test_stability_max_energy_skips_initial_state(self, small_grid):
        u0 = random_vector(small_grid, np.random.default_rng(5))
        traj = run_trajectory("main", SchemeParams(T=0.2, M=8), u0, None)
        energies = [d.energy for d in traj.rows() if d.step >= 1]
        quantities = study_lib.stability_quantities(traj)
        assert quantities["max_energy"] == max(energies)
        assert quantities["max_energy"] < norm(u0) ** 2

    def test_stability_sweep_non_nested_levels(self, make_config):
        config = make_config("study.levels=[4, 6, 8]", "study.M_ref=24")
        result = study_lib.run_stability_sweep(config, progress=False)
        assert [lvl.level for lvl in result.levels] == [4, 6, 8]
        assert all(lvl.blow_ups == 0 for lvl in result.levels)

    def test_decomposition(self, small_config):
        result = study_lib.run_decomposition_check(small_config)
        assert len(result.rows) == 8
        assert result.max_scale > 0
        tol = small_config["scheme"]["picard_tol"]
        for row in result.rows:
            assert row.u_residual <= 10 * tol * row.scale
        assert result.passed

    def test_noise_check(self, small_config):
        checks = study_lib.run_noise_check(small_config)
        assert [c.check for c in checks] == [
            "gram_deviation",
            "basis_divergence",
            "field_energy_ratio",
            "single_mode_variance_ratio",
            "telescoping_exact",
            "cross_path_correlation",
        ]
        assert all(c.passed for c in checks)

    def test_taylor_green(self, small_config):
        result = run_taylor_green(small_config, levels=[16, 32, 64, 128])
        assert [lvl.level for lvl in result.levels] == [16, 32, 64, 128]
        errors = [lvl.exact_error for lvl in result.levels]
        assert errors == sorted(errors, reverse=True)
        assert result.passed


@pytest.mark.slow
class TestAcceptance:
    """Desk-scale runs at the documented defaults."""

    def test_taylor_green_order(self):
        config = parse_config("", ["simulate.init_amplitude=1.0"])
        result = run_taylor_green(config, levels=[32, 64, 128, 256])
        assert abs(result.rate.slope - 1.0) <= 0.15
        assert result.passed

    def test_constraints_hold_every_step(self):
        traj = study_lib.run_simulation(default_config())
        rows = traj.rows()
        assert traj.params.M == 64 and len(rows) == 65
        assert traj.coupling_key is not None
        for row in rows:
            assert row.div_residual <= 1e-12
            assert row.penalty_residual <= 1e-12

    def test_decomposition_default(self):
        config = default_config()
        result = study_lib.run_decomposition_check(config)
        assert result.passed
        for row in result.rows:
            assert row.u_residual <= 1e-9 * row.scale

    def test_noise_default(self):
        checks = study_lib.run_noise_check(default_config())
        assert all(c.passed for c in checks)

    def test_stability_default(self):
        config = parse_config(
            "", ["study.levels=[32, 64, 128]", "study.paths=32"]
        )
        result = study_lib.run_stability_sweep(config, progress=False)
        assert result.passed

    def test_z_scheme_rate(self):
        config = parse_config("", ["study.paths=32", "study.workers=8"])
        _, rates = study_lib.run_z_study(config, progress=False)
        velocity = next(r for r in rates if r.response == "z_velocity")
        assert velocity.slope >= 0.8 * config["scheme"]["eta"]

    def test_strong_convergence_trend(self):
        config = parse_config("", ["study.workers=8"])
        result = study_lib.run_mc_study(config, progress=False)
        means = [r.finite_mean("tem") for r in result.reports]
        # Levels ascend in M, so k and the mean error decrease together.
        assert all(b < 1.1 * a for a, b in zip(means, means[1:]))
        rate = next(r for r in result.rates if r.response == "mean_tEM")
        assert rate.slope >= 0.15
        fractions = result.exceedance
        for coarse, fine in zip(fractions, fractions[1:]):
            band = coarse.ci_half_width + fine.ci_half_width
            assert fine.fraction <= coarse.fraction + band
