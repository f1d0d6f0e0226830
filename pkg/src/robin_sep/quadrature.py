"""Quadrature weights on uniform grids and compensated summation."""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy.integrate import cumulative_simpson


@lru_cache(maxsize=64)
def _simpson_weights(n_intervals: int) -> np.ndarray:
    m = n_intervals
    if m < 2:
        w = np.full(m + 1, 0.5)
        return w
    w = np.zeros(m + 1)
    if m % 2 == 0:
        w[0:m:2] += 1.0 / 3.0
        w[1:m:2] += 4.0 / 3.0
        w[2 : m + 1 : 2] += 1.0 / 3.0
    else:
        # Simpson on the first m-3 intervals, 3/8 rule on the last three
        k = m - 3
        if k > 0:
            w[0:k:2] += 1.0 / 3.0
            w[1:k:2] += 4.0 / 3.0
            w[2 : k + 1 : 2] += 1.0 / 3.0
        w[k : k + 4] += np.array([3.0, 9.0, 9.0, 3.0]) / 8.0
    w.setflags(write=False)
    return w


def simpson_weights(n_nodes: int, length: float = 1.0) -> np.ndarray:
    """Composite Simpson weights for ``n_nodes`` equispaced nodes on an interval."""
    m = n_nodes - 1
    return _simpson_weights(m) * (length / m)


def trapezoid_weights(x: np.ndarray) -> np.ndarray:
    """Trapezoid weights for a (possibly nonuniform) increasing grid."""
    x = np.asarray(x, dtype=float)
    w = np.zeros_like(x)
    dx = np.diff(x)
    w[:-1] += 0.5 * dx
    w[1:] += 0.5 * dx
    return w


def integrate(values: np.ndarray, length: float = 1.0, axis: int = -1) -> np.ndarray:
    """Simpson integral of equispaced samples along ``axis``."""
    values = np.asarray(values, dtype=float)
    w = simpson_weights(values.shape[axis], length)
    return np.tensordot(values, w, axes=([axis], [0]))


def cumulative(values: np.ndarray, h: float, axis: int = -1) -> np.ndarray:
    """Running integral from the left end, starting at zero."""
    return cumulative_simpson(np.asarray(values, dtype=float), dx=h, axis=axis, initial=0.0)


def fsum_rows(values) -> float:
    """Correctly rounded sum of an iterable of floats."""
    return math.fsum(float(v) for v in np.ravel(values))


def gauss_legendre_composite(n_panels: int, order: int = 16):
    """Nodes and weights of a composite Gauss-Legendre rule on [0, 1]."""
    xg, wg = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(0.0, 1.0, n_panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * xg[None, :]).ravel()
    weights = (half[:, None] * wg[None, :]).ravel()
    return nodes, weights
