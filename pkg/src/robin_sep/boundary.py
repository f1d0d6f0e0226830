"""Boundary cost functions of the reservoir exchange.

All functions broadcast over numpy arrays. Arguments follow the order
``(rho, d, a, m)``: reservoir density, coupling constant, boundary trace of
the density and boundary value of the field.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np


class BoundaryCostInputs(NamedTuple):
    rho: float
    d: float
    a: float
    m: float


def _check(rho, d, a):
    rho = np.asarray(rho, dtype=float)
    a = np.asarray(a, dtype=float)
    d = np.asarray(d, dtype=float)
    if np.any((rho <= 0) | (rho >= 1)):
        raise ValueError("reservoir density must lie in (0, 1)")
    if np.any(d <= 0):
        raise ValueError("coupling constant must be positive")
    return rho, d, a


def boundary_b(rho, d, a, m):
    """Boundary cost ``b = {(1-a) rho (e^M - 1) + a (1-rho)(e^-M - 1)} / D``."""
    rho, d, a = _check(rho, d, a)
    m = np.asarray(m, dtype=float)
    return ((1.0 - a) * rho * np.expm1(m) + a * (1.0 - rho) * np.expm1(-m)) / d


def boundary_p(rho, d, a, m):
    """Derivative of :func:`boundary_b` in ``m``; the boundary current."""
    rho, d, a = _check(rho, d, a)
    m = np.asarray(m, dtype=float)
    return ((1.0 - a) * rho * np.exp(m) - a * (1.0 - rho) * np.exp(-m)) / d


def boundary_p_prime(rho, d, a, m):
    """Second derivative of :func:`boundary_b` in ``m`` (strictly positive)."""
    rho, d, a = _check(rho, d, a)
    m = np.asarray(m, dtype=float)
    return ((1.0 - a) * rho * np.exp(m) + a * (1.0 - rho) * np.exp(-m)) / d


def boundary_c(rho, d, a, m):
    """Legendre-type cost ``c = M p - b``."""
    rho, d, a = _check(rho, d, a)
    m = np.asarray(m, dtype=float)
    em, emm = np.exp(m), np.exp(-m)
    up = -np.expm1(m) + m * em
    dn = -np.expm1(-m) - m * emm
    return ((1.0 - a) * rho * up + a * (1.0 - rho) * dn) / d


def boundary_q(rho, d, a, m):
    """Shifted cost ``q = b - M (rho - a) / D``, nonnegative and zero at ``M = 0``."""
    rho, d, a = _check(rho, d, a)
    m = np.asarray(m, dtype=float)
    up = np.expm1(m) - m
    dn = np.expm1(-m) + m
    return ((1.0 - a) * rho * up + a * (1.0 - rho) * dn) / d


def boundary_p_inverse(rho, d, a, p):
    """Solve ``boundary_p(rho, d, a, M) = p`` for ``M``.

    The current is strictly increasing in ``M`` with range the whole real
    line when ``0 < a < 1``, so the inverse is given by a quadratic in
    ``e^M``. The root formula is chosen by the sign of ``p`` to avoid
    cancellation.
    """
    rho, d, a = _check(rho, d, a)
    p = np.asarray(p, dtype=float)
    if np.any((a <= 0) | (a >= 1)):
        raise ValueError("boundary trace must lie in (0, 1) to invert the current")
    up = (1.0 - a) * rho
    dn = a * (1.0 - rho)
    dp = d * p
    disc = np.sqrt(dp * dp + 4.0 * up * dn)
    # positive p: z = (dp + disc) / (2 up); negative p: z = 2 dn / (disc - dp)
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(dp >= 0, (dp + disc) / (2.0 * up), (2.0 * dn) / (disc - dp))
    return np.log(z)
