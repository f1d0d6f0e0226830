"""Reservoir constants shared by every layer of the package."""

from __future__ import annotations

from dataclasses import dataclass, asdict

import numpy as np


@dataclass(frozen=True)
class ReservoirParams:
    """Boundary reservoirs of the exclusion process.

    Parameters
    ----------
    alpha, beta : float
        Reservoir densities at the left and right end, ``0 < alpha <= beta < 1``.
    cap_a, cap_b : float
        Inverse coupling strengths. Boundary flips occur at rate of order
        ``N / cap_a`` and ``N / cap_b``.
    """

    alpha: float
    beta: float
    cap_a: float = 1.0
    cap_b: float = 1.0

    def __post_init__(self):
        for name in ("alpha", "beta", "cap_a", "cap_b"):
            v = getattr(self, name)
            if not np.isfinite(v):
                raise ValueError(f"{name} must be finite, got {v!r}")
            object.__setattr__(self, name, float(v))
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        if not 0.0 < self.beta < 1.0:
            raise ValueError(f"beta must lie in (0, 1), got {self.beta}")
        if self.alpha > self.beta:
            raise ValueError(f"alpha <= beta required, got alpha={self.alpha} > beta={self.beta}")
        if self.cap_a <= 0.0:
            raise ValueError(f"cap_a must be positive, got {self.cap_a}")
        if self.cap_b <= 0.0:
            raise ValueError(f"cap_b must be positive, got {self.cap_b}")

    def to_dict(self) -> dict:
        return asdict(self)

    def stationary_profile(self, x):
        """Linear stationary density of the hydrodynamic equation."""
        a, b, A, B = self.alpha, self.beta, self.cap_a, self.cap_b
        x = np.asarray(x, dtype=float)
        return (a * (1.0 + B) + b * A) / (1.0 + A + B) + (b - a) * x / (1.0 + A + B)
