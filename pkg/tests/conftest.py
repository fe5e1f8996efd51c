"""Shared fixtures and the --runslow switch for the acceptance studies."""

import math

import numpy as np
import pytest

from penalty_ns.spectral.grid import Grid
from penalty_ns.utils.config import parse_config

# Small but non-trivial study used by the fast integration tests
SMALL_OPTIONS = (
    "grid.N=16",
    "scheme.T=0.2",
    "scheme.M=8",
    "study.levels=[2, 4, 8]",
    "study.M_ref=16",
    "study.paths=2",
)


def pytest_addoption(parser):
    parser.addoption(
        "--runslow",
        action="store_true",
        default=False,
        help="Run the slow Monte Carlo acceptance studies.",
    )


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "slow: long Monte Carlo study, needs --runslow"
    )


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def grid():
    """Default 32 x 32 grid on (0, 2 pi)^2."""
    return Grid(L=2 * math.pi, N=32)


@pytest.fixture
def small_grid():
    return Grid(L=2 * math.pi, N=16)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def small_config(tmp_path):
    """Validated config of a tiny study writing into tmp_path."""
    return parse_config(
        "", SMALL_OPTIONS + (f"output.dir={str(tmp_path)!r}",)
    )


@pytest.fixture
def make_config(tmp_path):
    """Factory of small configs with extra overrides."""

    def _make(*options):
        return parse_config(
            "",
            SMALL_OPTIONS + (f"output.dir={str(tmp_path)!r}",) + options,
        )

    return _make
