"""Simple utility functions for setting up schemes."""

from __future__ import annotations

from penalty_ns.schemes import auxiliary, base_scheme, direct, penalty
from penalty_ns.schemes.params import SchemeParams, SolverOpts

_SCHEME_DICT = {
    "main": penalty.MainScheme,
    "direct": direct.DirectScheme,
    "stokes-penalty": auxiliary.StokesPenaltyScheme,
    "stokes-direct": direct.StokesDirectScheme,
    "decomposed": auxiliary.DecomposedScheme,
}


def setup_scheme(
    scheme_tag: str,
    params: SchemeParams,
    opts: SolverOpts | None = None,
) -> base_scheme.BaseScheme:
    """Set up scheme object by tag."""
    if scheme_tag not in _SCHEME_DICT:
        raise ValueError(
            f"Unknown scheme {scheme_tag}! Choose from "
            f"{sorted(_SCHEME_DICT)}."
        )
    if opts is None:
        opts = SolverOpts()
    return _SCHEME_DICT[scheme_tag](params, opts)
