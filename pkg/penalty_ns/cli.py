"""Subcommand dispatch, run directories, manifests and CSV outputs."""

from __future__ import annotations

import logging
import pathlib
from typing import Callable, Dict, Optional, Sequence

import yaml

import penalty_ns
from penalty_ns.experiments import study as study_lib
from penalty_ns.experiments.taylor_green import run_taylor_green
from penalty_ns.hparams import (
    EXIT_NUMERICAL,
    EXIT_OK,
    EXIT_VALIDATION,
    MIN_STUDY_LEVELS,
    SUBCOMMANDS,
)
from penalty_ns.schemes.base_scheme import SchemeError
from penalty_ns.spectral.snapshot import save_snapshot
from penalty_ns.utils.argparse import parse_args
from penalty_ns.utils.config import ConfigError, RunConfig
from penalty_ns.utils.csv_io import OutputError, write_csv
from penalty_ns.utils.tqdm_logger import setup_logging

logger = logging.getLogger(__name__)

_SAMPLE_SET_NOTE = (
    "Omega_3 is evaluated on adjacent coarse time pairs only; the supremum "
    "in Omega_1 runs over the recorded reference times."
)


def run_dir_for(subcommand: str, config: RunConfig) -> pathlib.Path:
    """<output.dir>/<subcommand>-<config hash>/."""
    return pathlib.Path(config["output"]["dir"]) / f"{subcommand}-{config.hash}"


def write_manifest(
    run_dir: pathlib.Path, subcommand: str, config: RunConfig
) -> pathlib.Path:
    """Write manifest.yaml with the canonical config, hash and seeds."""
    manifest = {
        "subcommand": subcommand,
        "config_hash": config.hash,
        "version": penalty_ns.__version__,
        "seeds": {
            "base_seed": config["study"]["base_seed"],
            "path_index": config["simulate"]["path_index"],
        },
        "config": {section: dict(values) for section, values in config.items()},
        "canonical_config": config.canonical(),
    }
    if subcommand == "convergence" and config["study"]["sample_sets"]:
        manifest["notes"] = [_SAMPLE_SET_NOTE]
    path = run_dir / "manifest.yaml"
    try:
        with path.open("w", encoding="utf-8") as file:
            yaml.safe_dump(manifest, file, sort_keys=False)
    except OSError as err:
        raise OutputError(f"Failed to write {path}: {err}") from err
    return path


def prepare_run_dir(subcommand: str, config: RunConfig) -> pathlib.Path:
    """Create the run directory and its manifest."""
    run_dir = run_dir_for(subcommand, config)
    try:
        run_dir.mkdir(parents=True, exist_ok=True)
    except OSError as err:
        raise OutputError(f"Failed to create {run_dir}: {err}") from err
    write_manifest(run_dir, subcommand, config)
    return run_dir


def _check_levels(config: RunConfig) -> None:
    levels = config["study"]["levels"]
    if len(levels) < MIN_STUDY_LEVELS:
        raise ConfigError(
            f"study.levels needs at least {MIN_STUDY_LEVELS} levels for a "
            f"rate study, but it has {len(levels)}!",
            key="study.levels",
        )


# =========================================================================== #
#                                 Subcommands                                 #
# =========================================================================== #


def _simulate(config: RunConfig, run_dir: pathlib.Path, progress: bool) -> int:
    checkpoint_dir = None
    if config["simulate"]["checkpoint_every"] > 0:
        checkpoint_dir = run_dir / "checkpoints"
        checkpoint_dir.mkdir(exist_ok=True)
    traj = study_lib.run_simulation(config, checkpoint_dir)
    write_csv(
        traj.rows(),
        run_dir / "trajectory.csv",
        kind="trajectory",
        manifest_hash=config.hash,
    )
    u, p = traj.velocity(traj.M), traj.pressure(traj.M)
    meta = {"step": traj.M, "manifest": config.hash}
    save_snapshot(run_dir / "final_u.pnsf", u, meta)
    save_snapshot(run_dir / "final_p.pnsf", p, meta)
    last = traj.rows()[-1]
    logger.info(
        "%s: %d steps, final energy %.6g, div residual %.3e.",
        traj.scheme,
        traj.M,
        last.energy,
        last.div_residual,
    )
    return EXIT_OK


def _convergence(
    config: RunConfig, run_dir: pathlib.Path, progress: bool
) -> int:
    result = study_lib.run_mc_study(config, progress=progress)
    write_csv(
        result.error_rows(),
        run_dir / "errors.csv",
        kind="errors",
        manifest_hash=config.hash,
    )
    write_csv(
        result.rates,
        run_dir / "rates.csv",
        kind="rates",
        manifest_hash=config.hash,
    )
    write_csv(
        result.exceedance,
        run_dir / "exceedance.csv",
        kind="exceedance",
        manifest_hash=config.hash,
    )
    if result.sample_sets:
        write_csv(
            result.sample_sets,
            run_dir / "sample_sets.csv",
            kind="sample_sets",
            manifest_hash=config.hash,
        )
        write_csv(
            [row for report in result.z_reports for row in report.rows()],
            run_dir / "z_errors.csv",
            kind="errors",
            manifest_hash=config.hash,
        )
    for rate in result.rates:
        logger.info(
            "Rate of %s: %.4f (residual %.3e).",
            rate.response,
            rate.slope,
            rate.residual,
        )
    return EXIT_OK


def _stability(config: RunConfig, run_dir: pathlib.Path, progress: bool) -> int:
    result = study_lib.run_stability_sweep(config, progress=progress)
    write_csv(
        result.levels,
        run_dir / "stability.csv",
        kind="stability",
        manifest_hash=config.hash,
    )
    for name, spread in result.spread.items():
        logger.info("Relative spread of %s across levels: %.3f", name, spread)
    if not result.passed:
        logger.error(
            "Stability means vary by %.0f%% or more across levels.",
            100 * study_lib.STABILITY_SPREAD,
        )
        return EXIT_VALIDATION
    return EXIT_OK


def _taylor_green(
    config: RunConfig, run_dir: pathlib.Path, progress: bool
) -> int:
    result = run_taylor_green(config)
    write_csv(
        result.levels,
        run_dir / "taylor_green.csv",
        kind="taylor_green",
        manifest_hash=config.hash,
    )
    write_csv(
        [result.rate],
        run_dir / "rates.csv",
        kind="rates",
        manifest_hash=config.hash,
    )
    if not result.passed:
        logger.error("Taylor-Green validation failed.")
        return EXIT_VALIDATION
    return EXIT_OK


def _decompose(config: RunConfig, run_dir: pathlib.Path, progress: bool) -> int:
    result = study_lib.run_decomposition_check(config)
    write_csv(
        result.rows,
        run_dir / "decomposition.csv",
        kind="decomposition",
        manifest_hash=config.hash,
    )
    if not result.passed:
        logger.error(
            "Decomposition residual reaches %.3e x scale, above %.3e.",
            result.worst_ratio,
            result.threshold,
        )
        return EXIT_VALIDATION
    return EXIT_OK


def _noise_check(
    config: RunConfig, run_dir: pathlib.Path, progress: bool
) -> int:
    checks = study_lib.run_noise_check(config)
    write_csv(
        checks,
        run_dir / "noise_check.csv",
        kind="noise_check",
        manifest_hash=config.hash,
    )
    failed = [c.check for c in checks if not c.passed]
    if failed:
        logger.error("Noise checks failed: %s", ", ".join(failed))
        return EXIT_VALIDATION
    return EXIT_OK


_SUBCOMMAND_DICT: Dict[
    str, Callable[[RunConfig, pathlib.Path, bool], int]
] = {
    "simulate": _simulate,
    "convergence": _convergence,
    "stability": _stability,
    "taylor-green": _taylor_green,
    "decompose": _decompose,
    "noise-check": _noise_check,
}


def dispatch(
    subcommand: str,
    config: RunConfig,
    run_dir: Optional[pathlib.Path] = None,
    progress: bool = True,
) -> int:
    """Run one subcommand and return its exit status.

    Returns:
        0 on success, 1 on validation failure or a failed check, 2 on a
        numerical failure (SchemeError).

    Raises:
        ConfigError: Unknown subcommand.
    """
    if subcommand not in _SUBCOMMAND_DICT:
        raise ConfigError(
            f"Unknown subcommand {subcommand}! Choose from "
            f"{', '.join(SUBCOMMANDS)}."
        )
    try:
        if subcommand in ("convergence", "stability", "taylor-green"):
            _check_levels(config)
        if run_dir is None:
            run_dir = prepare_run_dir(subcommand, config)
        return _SUBCOMMAND_DICT[subcommand](config, run_dir, progress)
    except ConfigError as err:
        logger.error("Invalid config: %s", err)
        return EXIT_VALIDATION
    except SchemeError as err:
        logger.error("Numerical failure in %s: %s", subcommand, err)
        return EXIT_NUMERICAL


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Entry point; returns the process exit status."""
    setup_logging(1)
    try:
        subcommand, config, progress = parse_args(argv)
    except ConfigError as err:
        logger.error("Invalid config: %s", err)
        return EXIT_VALIDATION
    if subcommand not in _SUBCOMMAND_DICT:
        logger.error(
            "Unknown subcommand %s! Choose from %s.",
            subcommand,
            ", ".join(SUBCOMMANDS),
        )
        return EXIT_VALIDATION
    try:
        run_dir = prepare_run_dir(subcommand, config)
    except OutputError as err:
        logger.error("%s", err)
        return EXIT_VALIDATION
    setup_logging(
        config["output"]["verbosity"], log_file=str(run_dir / "results.log")
    )
    logger.info("Running %s; outputs in %s.", subcommand, run_dir)
    try:
        status = dispatch(subcommand, config, run_dir, progress)
    except OutputError as err:
        logger.error("%s", err)
        return EXIT_VALIDATION
    logger.info("%s finished with exit status %d.", subcommand, status)
    return status
