"""Microscopic layer: configurations, rates, simulation and path weights."""

from ..params import ReservoirParams
from .field import TiltField, oracle_field
from .io import load_configuration, load_jump_path, save_configuration, save_jump_path, save_measure
from .mollifier import bump, bump_normalizer, bump_scaled
from .rates import RateTable, ssep_rates, wasep_rates
from .simulate import (
    CELL_WIDTH,
    Simulator,
    empirical_density,
    girsanov_log_weight,
    make_rng,
    sample_profile,
    simulate,
    smoothing_matrix,
    time_averaged_occupation,
)
from .types import EmpiricalMeasure, JumpPath, LatticeConfiguration

__all__ = [
    "CELL_WIDTH",
    "EmpiricalMeasure",
    "JumpPath",
    "LatticeConfiguration",
    "RateTable",
    "ReservoirParams",
    "Simulator",
    "TiltField",
    "bump",
    "bump_normalizer",
    "bump_scaled",
    "empirical_density",
    "girsanov_log_weight",
    "load_configuration",
    "load_jump_path",
    "make_rng",
    "oracle_field",
    "sample_profile",
    "save_configuration",
    "save_jump_path",
    "save_measure",
    "simulate",
    "smoothing_matrix",
    "ssep_rates",
    "time_averaged_occupation",
    "wasep_rates",
]
