"""Compactly supported bump mollifier."""

from __future__ import annotations

from functools import lru_cache

import numpy as np
from scipy.integrate import quad


def _raw(r):
    r = np.asarray(r, dtype=float)
    out = np.zeros_like(r)
    inside = np.abs(r) < 1.0
    ri = r[inside]
    out[inside] = np.exp(-1.0 / (1.0 - ri * ri))
    return out


@lru_cache(maxsize=1)
def bump_normalizer() -> float:
    """``Z = int_{-1}^{1} exp(-1/(1-r^2)) dr`` to relative accuracy 1e-12."""
    val, err = quad(lambda r: float(np.exp(-1.0 / (1.0 - r * r))), -1.0, 1.0,
                    epsabs=0.0, epsrel=1e-13, limit=200)
    if err > 1e-12 * val:
        raise RuntimeError(f"mollifier normalizer not converged (error {err:.3e})")
    return val


def bump(r):
    """Unit-mass bump supported on ``(-1, 1)``."""
    return _raw(r) / bump_normalizer()


def bump_scaled(r, delta: float):
    """``bump(r / delta) / delta``, unit mass on ``(-delta, delta)``."""
    return bump(np.asarray(r, dtype=float) / delta) / delta
