"""Hydrodynamic, homogeneous Robin and controlled heat equations."""

from .diagnostics import FreeEnergyLedger, free_energy_diagnostic, weak_form_residual
from .path import DensityPath
from .solvers import (
    NumericalFailure,
    boundary_currents,
    mass,
    solve_controlled,
    solve_hydrodynamic,
    solve_robin_homogeneous,
    stationary_profile,
)

__all__ = [
    "DensityPath",
    "FreeEnergyLedger",
    "NumericalFailure",
    "boundary_currents",
    "free_energy_diagnostic",
    "mass",
    "solve_controlled",
    "solve_hydrodynamic",
    "solve_robin_homogeneous",
    "stationary_profile",
    "weak_form_residual",
]
