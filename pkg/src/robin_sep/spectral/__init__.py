"""Robin Laplacian: eigenpairs, Green operator, semigroups and norms."""

from .basis import (
    GridFunction,
    SpectralBasis,
    eigenfunction,
    eigenfunction_gradient,
    solve_eigenvalues,
    tangent_residual,
)
from .operators import (
    FLAVORS,
    TruncationWarning,
    coefficients,
    green_apply,
    green_kernel,
    h1_norm,
    hr_norm,
    l2_norm,
    semigroup_apply,
    semigroup_gradient,
    tail_mass,
)

__all__ = [
    "FLAVORS",
    "GridFunction",
    "SpectralBasis",
    "TruncationWarning",
    "coefficients",
    "eigenfunction",
    "eigenfunction_gradient",
    "green_apply",
    "green_kernel",
    "h1_norm",
    "hr_norm",
    "l2_norm",
    "semigroup_apply",
    "semigroup_gradient",
    "solve_eigenvalues",
    "tail_mass",
    "tangent_residual",
]
