"""Statistical checks of the particle system against the macroscopic theory."""

from .harness import (
    entropy_identity_check,
    hydro_limit_check,
    rare_event_probe,
    replica_seeds,
    tilted_hydro_check,
)
from .reports import ConvergenceReport, EntropyReport, RareEventReport, ScaleResult, provenance

__all__ = [
    "ConvergenceReport",
    "EntropyReport",
    "RareEventReport",
    "ScaleResult",
    "entropy_identity_check",
    "hydro_limit_check",
    "provenance",
    "rare_event_probe",
    "replica_seeds",
    "tilted_hydro_check",
]
