"""Green operator, heat semigroups and the Robin energy norm."""

from __future__ import annotations

import warnings

import numpy as np
from scipy.special import erfc

from ..params import ReservoirParams
from ..quadrature import cumulative, simpson_weights
from .basis import GridFunction, SpectralBasis

FLAVORS = ("robin", "mixed", "dirichlet", "neumann")


class TruncationWarning(RuntimeWarning):
    """The retained modes do not resolve the semigroup at the requested time."""


def _as_grid(f) -> GridFunction:
    return f if isinstance(f, GridFunction) else GridFunction(f)


def green_kernel(params: ReservoirParams, x, y):
    """Robin Green kernel, the inverse of ``-Laplacian`` with the Robin conditions."""
    A, B = params.cap_a, params.cap_b
    x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
    lo, hi = np.minimum(x, y), np.maximum(x, y)
    return (B + 1.0 - hi) * (A + lo) / (1.0 + A + B)


def green_apply(params: ReservoirParams, f) -> GridFunction:
    """Apply the Green operator to grid samples using running Simpson integrals."""
    f = _as_grid(f)
    A, B = params.cap_a, params.cap_b
    x, v, h = f.x, f.values, f.h
    left = cumulative((A + x) * v, h)
    right_run = cumulative((B + 1.0 - x) * v, h)
    right = right_run[-1] - right_run
    return GridFunction(((B + 1.0 - x) * left + (A + x) * right) / (1.0 + A + B))


def hr_norm(params: ReservoirParams, f) -> float:
    """Squared Robin energy norm ``f(0)^2/A + int (f')^2 + f(1)^2/B``."""
    f = _as_grid(f)
    v = f.values
    grad = np.gradient(v, f.h, edge_order=2)
    w = simpson_weights(v.size)
    return float(v[0] ** 2 / params.cap_a + w @ grad ** 2 + v[-1] ** 2 / params.cap_b)


def h1_norm(f) -> float:
    """Squared first-order Sobolev norm on the grid."""
    f = _as_grid(f)
    grad = np.gradient(f.values, f.h, edge_order=2)
    w = simpson_weights(f.values.size)
    return float(w @ (f.values ** 2 + grad ** 2))


def l2_norm(f) -> float:
    f = _as_grid(f)
    return float(np.sqrt(simpson_weights(f.values.size) @ f.values ** 2))


def coefficients(basis: SpectralBasis, f) -> np.ndarray:
    """Inner products ``<f, f_k>`` by composite Simpson quadrature."""
    f = _as_grid(f)
    w = simpson_weights(f.values.size)
    return _table(basis, "robin", f.values.size).T @ (w * f.values)


def tail_mass(basis: SpectralBasis, t: float) -> float:
    """Bound on ``sum_{k > K} exp(-lambda_k t)``.

    Uses ``sqrt(lambda_k) > (k - 1) pi``, so the sum is dominated by the
    Gaussian integral over ``s > (K - 1)``.
    """
    if t <= 0:
        return np.inf
    r = np.pi * np.sqrt(t)
    return float(0.5 * np.sqrt(np.pi) / r * erfc((basis.truncation - 1) * r))


def _classical(kind: str, k: np.ndarray, x: np.ndarray, derivative: bool = False):
    kx = np.multiply.outer(x, k * np.pi)
    if kind == "dirichlet":
        if derivative:
            return np.sqrt(2.0) * k * np.pi * np.cos(kx)
        return np.sqrt(2.0) * np.sin(kx)
    # neumann: constant mode k = 0 carries weight 1
    c = np.where(k == 0, 1.0, np.sqrt(2.0))
    if derivative:
        return -c * k * np.pi * np.sin(kx)
    return c * np.cos(kx)


def _table(basis, flavor, n, derivative=False):
    key = (flavor, derivative, n)
    tab = basis._tables.get(key)
    if tab is None:
        x = np.linspace(0.0, 1.0, n)
        if flavor == "robin":
            tab = basis.gradients(x) if derivative else basis.values(x)
        else:
            K = basis.truncation
            k = np.arange(1, K + 1) if flavor == "dirichlet" else np.arange(0, K + 1)
            tab = _classical(flavor, k, x, derivative)
        tab.setflags(write=False)
        basis._tables[key] = tab
    return tab


def _spectral(basis, flavor, n):
    """Eigenvalues, eigenfunctions on the n-point grid and a lazy gradient table."""
    if flavor == "robin":
        lam = basis.eigenvalues
    else:
        K = basis.truncation
        k = np.arange(1, K + 1) if flavor == "dirichlet" else np.arange(0, K + 1)
        lam = (k * np.pi) ** 2.0
    return lam, _table(basis, flavor, n), lambda: _table(basis, flavor, n, True)


def _check_tail(basis, t, tol):
    if t > 0:
        tail = tail_mass(basis, t)
        if tail > tol:
            warnings.warn(
                f"truncation K={basis.truncation} leaves tail mass {tail:.3e} at t={t:g}",
                TruncationWarning,
                stacklevel=3,
            )


def semigroup_apply(basis: SpectralBasis, t: float, f, flavor: str = "robin",
                    tail_tol: float = 1e-6) -> GridFunction:
    """Heat semigroup at time ``t`` applied to grid samples.

    Parameters
    ----------
    flavor : {"robin", "mixed", "dirichlet", "neumann"}
        Boundary conditions. The Dirichlet and Neumann flavors use sine and
        cosine bases with the same truncation as ``basis``. The mixed flavor
        is obtained from the Robin semigroup by differentiating a Robin
        antiderivative of the data.
    """
    if t < 0:
        raise ValueError("t must be nonnegative")
    if flavor not in FLAVORS:
        raise ValueError(f"unknown flavor {flavor!r}; expected one of {FLAVORS}")
    f = _as_grid(f)
    if flavor == "mixed":
        return _mixed_apply(basis, t, f, tail_tol)
    _check_tail(basis, t, tail_tol)
    x = f.x
    lam, phi, _ = _spectral(basis, flavor, x.size)
    c = phi.T @ (simpson_weights(x.size) * f.values)
    return GridFunction(phi @ (np.exp(-lam * t) * c))


def semigroup_gradient(basis: SpectralBasis, t: float, f, flavor: str = "robin",
                       tail_tol: float = 1e-6) -> GridFunction:
    """Exact space derivative of the truncated series of :func:`semigroup_apply`."""
    if flavor not in ("robin", "dirichlet", "neumann"):
        raise ValueError(f"gradient available for robin, dirichlet, neumann; got {flavor!r}")
    f = _as_grid(f)
    _check_tail(basis, t, tail_tol)
    x = f.x
    lam, phi, dphi = _spectral(basis, flavor, x.size)
    c = phi.T @ (simpson_weights(x.size) * f.values)
    return GridFunction(dphi() @ (np.exp(-lam * t) * c))


def _mixed_apply(basis, t, g, tail_tol):
    A, B = basis.params.cap_a, basis.params.cap_b
    v = g.values
    total = simpson_weights(v.size) @ v
    # constants are fixed; remove the component that has no Robin antiderivative
    kappa = (A * v[0] + total + B * v[-1]) / (1.0 + A + B)
    gt = v - kappa
    antider = A * gt[0] + cumulative(gt, g.h)
    out = semigroup_gradient(basis, t, GridFunction(antider), "robin", tail_tol).values + kappa
    return GridFunction(out)
