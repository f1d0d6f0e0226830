"""Boundary cost algebra (re-exported from :mod:`robin_sep.boundary`)."""

from ..boundary import (
    BoundaryCostInputs,
    boundary_b,
    boundary_c,
    boundary_p,
    boundary_p_inverse,
    boundary_p_prime,
    boundary_q,
)

__all__ = [
    "BoundaryCostInputs",
    "boundary_b",
    "boundary_c",
    "boundary_p",
    "boundary_p_inverse",
    "boundary_p_prime",
    "boundary_q",
]
