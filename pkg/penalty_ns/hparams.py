"""Define common global variables.

The intention of this file is to centralize defaults and output contracts so
they are easy to find and modify. Modules read their ranges from here and the
config parser uses the same tables to build the documented default config.
"""

from __future__ import annotations

import math
from typing import Any, Dict, Tuple

# Env var that overrides output.dir
OUTPUT_DIR_ENV = "PENALTY_NS_OUTPUT_DIR"

SUBCOMMANDS = (
    "simulate",
    "convergence",
    "stability",
    "taylor-green",
    "decompose",
    "noise-check",
)

SCHEME_TAGS = (
    "main",
    "direct",
    "stokes-penalty",
    "stokes-direct",
    "decomposed",
)

INITIAL_CONDITIONS = ("zero", "random", "taylor-green")
THRESHOLD_MODES = ("quantile", "schedule")

# Exit statuses of the CLI
EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_NUMERICAL = 2

# Dyadic lattice for Brownian increments; sums of up to 2**16 draws are exact
INCREMENT_QUANTUM = 2.0**-36

# =========================================================================== #
#                               Default config                                #
# =========================================================================== #

# Section -> key -> default. Order here is the canonical order.
DEFAULT_CONFIG: Dict[str, Dict[str, Any]] = {
    "grid": {
        "L": 2 * math.pi,
        "N": 32,
        "dealias_pad": 1.5,
        "fft_workers": 1,
    },
    "scheme": {
        "nu": 1.0,
        "T": 0.5,
        "M": 64,
        "epsilon": 0.1,
        "eta": 0.4,
        "alpha": 2.0,
        "couple_eps_to_k": True,
        "lagged_advection": False,
        "picard_tol": 1e-11,
        "picard_max_iter": 100,
        "divergence_guard": 1e3,
    },
    "noise": {
        "J": -1,  # -1: min(8, N // 4)
        "gamma": 3.0,
    },
    "study": {
        "levels": [16, 32, 64, 128],
        "M_ref": 1024,
        "paths": 64,
        "base_seed": 20240917,
        "workers": 1,
        "C": -1.0,
        "r": 0.2,
        "threshold_mode": "quantile",
        "threshold_quantile": 0.9,
        "mu": -1.0,
        "sample_sets": False,
        "init": "random",
        "init_amplitude": 1.0,
    },
    "simulate": {
        "scheme": "main",
        "path_index": 0,
        "init": "random",
        "init_amplitude": 1.0,
        "zero_noise": False,
        "checkpoint_every": 0,
    },
    "output": {
        "dir": "./results/",
        "verbosity": 1,
    },
}

# Default noise cutoff is min(8, N/4)
DEFAULT_J_CAP = 8

# =========================================================================== #
#                            CSV column contracts                             #
# =========================================================================== #

CSV_COLUMNS: Dict[str, Tuple[str, ...]] = {
    "trajectory": (
        "step",
        "t",
        "energy",
        "enstrophy",
        "div_residual",
        "penalty_residual",
        "picard_iters",
    ),
    "errors": (
        "path",
        "level",
        "k",
        "eps",
        "EM",
        "tEM",
        "EM_max_term",
        "EM_grad_term",
        "EM_pressure_term",
        "blew_up",
    ),
    "rates": ("response", "slope", "intercept", "residual"),
    "exceedance": ("level", "k", "C", "r", "fraction", "ci_half_width"),
}

# Significant digits for floats written to CSV
CSV_FLOAT_FORMAT = "%.17g"

# Columns of the study-specific outputs, in the order of their as_row()
CSV_COLUMNS.update(
    {
        "sample_sets": (
            "level",
            "k",
            "kappa1",
            "kappa2",
            "kappa3",
            "p_out1",
            "p_out2",
            "p_out3",
            "conditional",
            "bound",
        ),
        "stability": (
            "level",
            "k",
            "eps",
            "max_energy",
            "max_energy_stderr",
            "grad_sum",
            "grad_sum_stderr",
            "pressure_sum",
            "pressure_sum_stderr",
            "blow_ups",
        ),
        "taylor_green": (
            "level",
            "k",
            "exact_error",
            "recursion_error",
            "pressure_error",
        ),
        "decomposition": (
            "step",
            "u_residual",
            "phi_residual",
            "p_residual",
            "scale",
        ),
        "noise_check": ("check", "value", "lower", "upper", "passed"),
    }
)

# Minimum number of levels of a rate study
MIN_STUDY_LEVELS = 3
