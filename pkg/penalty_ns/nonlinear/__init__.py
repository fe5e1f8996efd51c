"""Dealiased convective operators and trilinear forms."""

from penalty_ns.nonlinear.convection import b_apply, b_tilde_apply, trilinear
from penalty_ns.nonlinear.workspace import PaddedWorkspace, get_workspace

__all__ = [
    "PaddedWorkspace",
    "b_apply",
    "b_tilde_apply",
    "get_workspace",
    "trilinear",
]
