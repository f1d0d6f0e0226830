"""Energy of a density path."""

from __future__ import annotations

import numpy as np

from ..pde.path import DensityPath
from ..quadrature import simpson_weights, trapezoid_weights


def energy(u: DensityPath) -> tuple[float, float]:
    """Return ``(Q, strong)``.

    ``Q = 1/2 int int (u')^2`` and ``strong = int int (u')^2 / sigma(u)``, the
    latter with the density clamped away from 0 and 1.
    """
    grad = u.gradient()
    ws = simpson_weights(u.values.shape[1])
    wt = trapezoid_weights(u.times)
    q = 0.5 * wt @ ((grad ** 2) @ ws)
    c = u.clamped()
    strong = wt @ ((grad ** 2 / (c * (1 - c))) @ ws)
    return float(q), float(strong)
