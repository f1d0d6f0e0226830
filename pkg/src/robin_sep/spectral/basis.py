"""Eigenpairs of the Laplacian with Robin boundary conditions.

The operator acts on ``[0, 1]`` with ``f(0) = A f'(0)`` and
``f(1) = -B f'(1)``. Eigenvalues are ``lambda = s**2`` with ``s`` a positive
root of the entire function

    g(s) = sin(s) (s^2 A B - 1) - (A + B) s cos(s),

which has exactly one zero in every interval ``((j-1) pi, j pi)``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..params import ReservoirParams


@dataclass(frozen=True)
class GridFunction:
    """Samples of a function on the uniform grid ``x_i = i / M``."""

    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim != 1:
            raise ValueError("grid function must be one-dimensional")
        if v.size < 17:
            raise ValueError(f"grid needs at least 16 intervals, got {v.size - 1}")
        if not np.all(np.isfinite(v)):
            raise ValueError("grid function has non-finite values")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def n_intervals(self) -> int:
        return self.values.size - 1

    @property
    def h(self) -> float:
        return 1.0 / self.n_intervals

    @property
    def x(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.values.size)

    @classmethod
    def from_callable(cls, func, n_intervals: int = 1024) -> "GridFunction":
        x = np.linspace(0.0, 1.0, n_intervals + 1)
        return cls(np.broadcast_to(np.asarray(func(x), dtype=float), x.shape))


def _g(s, ab, apb):
    return np.sin(s) * (s * s * ab - 1.0) - apb * s * np.cos(s)


def _dg(s, ab, apb):
    return (np.cos(s) * (s * s * ab - 1.0 - apb)
            + np.sin(s) * (2.0 * s * ab + apb * s))


def tangent_residual(s, cap_a: float, cap_b: float):
    """Residual ``|tan(s) (s^2 A B - 1) - (A + B) s|`` of the eigenvalue equation."""
    s = np.asarray(s, dtype=float)
    return np.abs(np.tan(s) * (s * s * cap_a * cap_b - 1.0) - (cap_a + cap_b) * s)


def _polish(s, cap_a, cap_b, ulps=6):
    """Pick the double near ``s`` with the smallest tangent residual."""
    out = s.copy()
    best = tangent_residual(s, cap_a, cap_b)
    for direction in (np.inf, -np.inf):
        cur = s.copy()
        for _ in range(ulps):
            cur = np.nextafter(cur, direction)
            r = tangent_residual(cur, cap_a, cap_b)
            better = r < best
            out[better] = cur[better]
            best[better] = r[better]
    return out, best


def _norm_sq(s, cap_a):
    """Closed-form ``int_0^1 (cos sx + b sin sx)^2 dx`` with ``b = 1/(A s)``."""
    b = 1.0 / (cap_a * s)
    return (0.5 * (1.0 + b * b) + (1.0 - b * b) * np.sin(2.0 * s) / (4.0 * s)
            + b * (1.0 - np.cos(2.0 * s)) / (2.0 * s))


@dataclass(frozen=True)
class SpectralBasis:
    """Truncated Robin eigenbasis.

    Attributes
    ----------
    params : ReservoirParams
        Only ``cap_a`` and ``cap_b`` enter.
    roots : ndarray
        Square roots ``s_j`` of the eigenvalues, the primary stored quantity.
    amplitudes : ndarray
        Positive normalization constants ``a_j``.
    residuals : ndarray
        Tangent-form residual of each root.
    """

    params: ReservoirParams
    roots: np.ndarray
    amplitudes: np.ndarray
    residuals: np.ndarray = field(repr=False)
    # eigenfunction tables on uniform grids, keyed by (flavor, derivative, size)
    _tables: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    @property
    def truncation(self) -> int:
        return self.roots.size

    @property
    def eigenvalues(self) -> np.ndarray:
        return self.roots ** 2

    def growth_constants(self):
        """Empirical ``(c0, c1)`` with ``c0 j^2 <= lambda_j <= c1 j^2``."""
        j = np.arange(1, self.truncation + 1)
        ratio = self.eigenvalues / j ** 2
        return float(ratio.min()), float(ratio.max())

    def values(self, x, j=None) -> np.ndarray:
        """Eigenfunctions at ``x``; shape ``(len(x), K)`` or ``(len(x),)`` for one index."""
        x = np.asarray(x, dtype=float)
        s, a = self._select(j)
        sx = np.multiply.outer(x, s)
        return a * (np.cos(sx) + np.sin(sx) / (self.params.cap_a * s))

    def gradients(self, x, j=None) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        s, a = self._select(j)
        sx = np.multiply.outer(x, s)
        return a * (-s * np.sin(sx) + np.cos(sx) / self.params.cap_a)

    def _select(self, j):
        if j is None:
            return self.roots, self.amplitudes
        j = int(j)
        if not 1 <= j <= self.truncation:
            raise IndexError(f"eigenfunction index {j} outside 1..{self.truncation}")
        return self.roots[j - 1], self.amplitudes[j - 1]

    def to_csv(self, path) -> Path:
        path = Path(path)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["j", "lambda_j", "a_j", "residual"])
            for j, (lam, a, r) in enumerate(zip(self.eigenvalues, self.amplitudes, self.residuals), 1):
                w.writerow([j, "%.17g" % lam, "%.17g" % a, "%.17g" % r])
        return path


def solve_eigenvalues(params: ReservoirParams, count: int, scan_points: int = 64) -> SpectralBasis:
    """Compute the ``count`` smallest Robin eigenvalues.

    Each interval ``((j-1) pi, j pi)`` is scanned for sign changes of the
    entire form of the eigenvalue equation, bracketed roots are refined by 80
    bisection steps and 5 Newton steps, and the final double is chosen to
    minimize the tangent residual.

    Raises
    ------
    RuntimeError
        If some interval does not contain exactly one sign change.
    """
    if count < 1:
        raise ValueError("count must be at least 1")
    A, B = params.cap_a, params.cap_b
    ab, apb = A * B, A + B
    j = np.arange(1, count + 1, dtype=float)
    lo = (j - 1.0) * np.pi
    hi = j * np.pi
    lo[0] = 1e-9

    grid = lo[:, None] + (hi - lo)[:, None] * np.linspace(0.0, 1.0, scan_points + 1)[None, :]
    vals = _g(grid, ab, apb)
    changes = np.count_nonzero(np.signbit(vals[:, 1:]) != np.signbit(vals[:, :-1]), axis=1)
    bad = np.flatnonzero(changes != 1)
    if bad.size:
        raise RuntimeError(f"eigenvalue bracketing failed on intervals {bad + 1} (sign changes {changes[bad]})")
    k = np.argmax(np.signbit(vals[:, 1:]) != np.signbit(vals[:, :-1]), axis=1)
    rows = np.arange(count)
    a_lo, a_hi = grid[rows, k].copy(), grid[rows, k + 1].copy()
    g_lo = _g(a_lo, ab, apb)
    for _ in range(80):
        mid = 0.5 * (a_lo + a_hi)
        g_mid = _g(mid, ab, apb)
        same = np.signbit(g_mid) == np.signbit(g_lo)
        a_lo = np.where(same, mid, a_lo)
        g_lo = np.where(same, g_mid, g_lo)
        a_hi = np.where(same, a_hi, mid)
    s = 0.5 * (a_lo + a_hi)
    for _ in range(5):
        d = _dg(s, ab, apb)
        step = np.where(d != 0.0, _g(s, ab, apb) / np.where(d != 0.0, d, 1.0), 0.0)
        s_new = s - step
        # Newton must stay inside the bracket
        s = np.where((s_new > lo) & (s_new < hi), s_new, s)
    s, res = _polish(s, A, B)
    amp = 1.0 / np.sqrt(_norm_sq(s, A))
    for arr in (s, amp, res):
        arr.setflags(write=False)
    return SpectralBasis(params=params, roots=s, amplitudes=amp, residuals=res)


def eigenfunction(basis: SpectralBasis, j: int, x):
    """Normalized eigenfunction ``a_j [cos(s_j x) + sin(s_j x) / (A s_j)]``."""
    return basis.values(x, j)


def eigenfunction_gradient(basis: SpectralBasis, j: int, x):
    return basis.gradients(x, j)
