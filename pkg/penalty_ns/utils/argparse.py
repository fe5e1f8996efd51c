"""Define argument and config parsing."""

from __future__ import annotations

import argparse
import logging
import os
import pathlib
from typing import List, Mapping, Optional, Sequence, Tuple

from penalty_ns.hparams import OUTPUT_DIR_ENV, SUBCOMMANDS
from penalty_ns.utils.config import ConfigError, RunConfig, parse_config

logger = logging.getLogger(__name__)


def build_parser() -> argparse.ArgumentParser:
    """Argument parser of the penalty_ns entry point."""
    parser = argparse.ArgumentParser(
        description=(
            "Penalty-projection scheme for the stochastic Navier-Stokes "
            "equations on the torus: simulation and Monte Carlo studies."
        )
    )
    parser.add_argument(
        "subcommand",
        type=str,
        help=f"One of {', '.join(SUBCOMMANDS)}.",
    )
    parser.add_argument(
        "-e",
        "--exp-config-file",
        type=str,
        default=None,
        help="Path to TOML config file; missing keys keep their defaults.",
    )
    parser.add_argument(
        "--options",
        type=str,
        nargs="+",
        default=[],
        help=(
            "Custom config options; will overwrite config file. Use '.' to "
            'impose hierarchy and space to separate options, e.g., --options '
            '"scheme.M=128 study.paths=8".'
        ),
    )
    parser.add_argument(
        "--no-progress",
        action="store_true",
        help="Disable progress bars.",
    )
    return parser


def load_config(
    config_file: Optional[str],
    options: Sequence[str] = (),
    environ: Optional[Mapping[str, str]] = None,
) -> RunConfig:
    """Read, override and validate the run config.

    Precedence from low to high: defaults, config file, the output dir env
    var, --options.

    Raises:
        ConfigError: Unreadable file or invalid config.
    """
    text = ""
    if config_file:
        try:
            text = pathlib.Path(config_file).read_text(encoding="utf-8")
        except OSError as err:
            raise ConfigError(
                f"Cannot read config file {config_file}: {err}"
            ) from err
    if environ is None:
        environ = os.environ
    overrides: List[str] = []
    if environ.get(OUTPUT_DIR_ENV):
        overrides.append(f"output.dir={environ[OUTPUT_DIR_ENV]!r}")
        logger.debug("Output dir taken from %s.", OUTPUT_DIR_ENV)
    overrides.extend(options)
    return parse_config(text, overrides)


def parse_args(
    argv: Optional[Sequence[str]] = None,
) -> Tuple[str, RunConfig, bool]:
    """Parse the command line.

    Returns:
        (subcommand, config, show_progress).

    Raises:
        ConfigError: Invalid config.
    """
    args = build_parser().parse_args(argv)
    config = load_config(args.exp_config_file, args.options)
    return args.subcommand, config, not args.no_progress
