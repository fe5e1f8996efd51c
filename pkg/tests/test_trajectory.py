"""Tests for the trajectory runner and checkpoints."""

import logging

import numpy as np
import pytest

from penalty_ns.noise.increments import sample_increments
from penalty_ns.noise.model import build_noise_model
from penalty_ns.schemes.base_scheme import PicardDiverged
from penalty_ns.schemes.checkpoint import load_checkpoint, save_checkpoint
from penalty_ns.schemes.params import SchemeParams, SolverOpts
from penalty_ns.schemes.trajectory import run_trajectory
from penalty_ns.spectral.operators import random_vector


@pytest.fixture
def setup(small_grid):
    model = build_noise_model(small_grid)
    params = SchemeParams(T=0.2, M=8)
    incs = sample_increments(model, 16, 7, 1, T=params.T)
    u0 = random_vector(small_grid, np.random.default_rng(9))
    return model, params, incs, u0


class TestRunTrajectory:
    """Stepping, recording and hooks."""

    def test_zero_steps(self, setup):
        _, params, _, u0 = setup
        traj = run_trajectory("main", params.at_level(0), u0, None)
        assert len(traj.rows()) == 1
        assert list(traj.snapshots) == [0]
        assert traj.velocity(0).bit_equal(u0)
        assert traj.final_state.step == 0

    def test_runs_on_coarsened_noise(self, setup):
        model, params, incs, u0 = setup
        traj = run_trajectory("main", params, u0, incs, model=model)
        assert [row.step for row in traj.rows()] == list(range(9))
        assert traj.rows()[-1].t == pytest.approx(params.T)
        assert traj.coupling_key == incs.coupling_key

    def test_record_cadence(self, setup):
        model, params, incs, u0 = setup
        traj = run_trajectory(
            "main", params, u0, incs, model=model, record_every=3
        )
        assert sorted(traj.snapshots) == [0, 3, 6, 8]
        with pytest.raises(KeyError, match="not recorded"):
            traj.velocity(4)

    def test_hooks_do_not_change_results(self, setup):
        model, params, incs, u0 = setup
        seen = []

        def hook(step, t, state):
            seen.append((step, t, state.u))

        plain = run_trajectory("main", params, u0, incs, model=model)
        hooked = run_trajectory(
            "main", params, u0, incs, model=model, hooks=(hook,)
        )
        assert [s for s, _, _ in seen] == list(range(params.M + 1))
        assert hooked.final_state.u.bit_equal(plain.final_state.u)
        assert seen[-1][2].bit_equal(plain.final_state.u)

    def test_level_mismatch(self, setup):
        model, params, incs, u0 = setup
        with pytest.raises(ValueError, match="must equal"):
            run_trajectory("main", params, u0, incs, level=4, model=model)

    def test_noise_needs_model(self, setup):
        _, params, incs, u0 = setup
        with pytest.raises(ValueError, match="noise model"):
            run_trajectory("main", params, u0, incs)

    def test_projects_divergent_initial_data(self, small_grid, caplog):
        params = SchemeParams(T=0.2, M=1)
        u0 = random_vector(
            small_grid, np.random.default_rng(2), solenoidal=False
        )
        with caplog.at_level(logging.WARNING):
            traj = run_trajectory("main", params, u0, None)
        assert "projecting" in caplog.text
        assert traj.rows()[0].div_residual <= 1e-12

    def test_failure_reports_step(self, setup):
        model, params, incs, u0 = setup
        with pytest.raises(PicardDiverged) as info:
            run_trajectory(
                "main",
                params,
                u0,
                incs,
                opts=SolverOpts(picard_max_iter=1),
                model=model,
            )
        assert info.value.step == 1


class TestCheckpoint:
    """Checkpoint files and bit-identical restarts."""

    @pytest.mark.parametrize("tag", ["main", "decomposed"])
    def test_restart_is_bit_identical(self, setup, tmp_path, tag):
        model, params, incs, u0 = setup
        full = run_trajectory(
            tag,
            params,
            u0,
            incs,
            model=model,
            checkpoint_every=4,
            checkpoint_dir=tmp_path,
        )
        path = tmp_path / "checkpoint-000004.pnsf"
        state, meta = load_checkpoint(path, u0.grid)
        assert meta["next_step"] == 5
        assert meta["scheme"] == tag
        assert meta["path_index"] == incs.path_index
        resumed = run_trajectory(
            tag, params, u0, incs, model=model, start_state=state
        )
        assert resumed.final_state.u.bit_equal(full.final_state.u)
        assert resumed.final_state.p.bit_equal(full.final_state.p)
        assert [r.step for r in resumed.rows()] == [4, 5, 6, 7, 8]

    def test_roundtrip_fields(self, setup, tmp_path):
        model, params, incs, u0 = setup
        traj = run_trajectory("decomposed", params, u0, incs, model=model)
        state = traj.final_state
        save_checkpoint(tmp_path / "c.pnsf", state, {"note": "x"})
        loaded, meta = load_checkpoint(tmp_path / "c.pnsf")
        assert meta["note"] == "x" and meta["decomposed"]
        assert loaded.z.u.bit_equal(state.z.u)
        assert loaded.v.phi.bit_equal(state.v.phi)
        assert loaded.v.advector.bit_equal(state.v.advector)
        assert loaded.step == state.step == params.M
