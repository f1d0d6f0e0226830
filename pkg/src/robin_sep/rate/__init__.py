"""Boundary costs, the functional J and three evaluations of the rate."""

from .algebra import PathCostReport, path_cost_algebra_check
from .costs import (
    BoundaryCostInputs,
    boundary_b,
    boundary_c,
    boundary_p,
    boundary_p_inverse,
    boundary_p_prime,
    boundary_q,
)
from .decomposed import decompose, envelope_bound, legendre_boundary, rate_decomposed
from .direct import NewtonFailure, optimal_field, rate_direct
from .energy import energy
from .functional import JValue, field_on_path, functional_j, j_from_arrays
from .types import BoundaryDecomposition, RateBreakdown
from .variational import (
    DEFAULT_SCHEDULE,
    AscentWarning,
    VariationalResult,
    hat_values,
    rate_variational,
    space_basis,
    variational_curve,
)

__all__ = [
    "AscentWarning",
    "BoundaryCostInputs",
    "BoundaryDecomposition",
    "DEFAULT_SCHEDULE",
    "JValue",
    "NewtonFailure",
    "PathCostReport",
    "RateBreakdown",
    "VariationalResult",
    "boundary_b",
    "boundary_c",
    "boundary_p",
    "boundary_p_inverse",
    "boundary_p_prime",
    "boundary_q",
    "decompose",
    "energy",
    "envelope_bound",
    "field_on_path",
    "functional_j",
    "hat_values",
    "j_from_arrays",
    "legendre_boundary",
    "optimal_field",
    "path_cost_algebra_check",
    "rate_decomposed",
    "rate_direct",
    "rate_variational",
    "space_basis",
    "variational_curve",
]
