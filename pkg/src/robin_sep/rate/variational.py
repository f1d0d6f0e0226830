"""Lower bounds on the rate by maximizing the functional over a finite basis."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import legendre as npleg
from scipy.linalg import cho_factor, cho_solve, LinAlgError

from ..boundary import boundary_b, boundary_p, boundary_p_prime
from ..params import ReservoirParams
from ..pde.path import DensityPath
from ..quadrature import simpson_weights, trapezoid_weights


class AscentWarning(RuntimeWarning):
    """The ascent trace decreased, a sign of a step-size problem."""


def hat_values(times: np.ndarray, n_time: int) -> np.ndarray:
    """Piecewise-linear hat functions on ``n_time`` equispaced nodes, sampled at ``times``."""
    if n_time < 2:
        return np.ones((times.size, 1))
    nodes = np.linspace(times[0], times[-1], n_time)
    eye = np.eye(n_time)
    return np.column_stack([np.interp(times, nodes, eye[a]) for a in range(n_time)])


def space_basis(x: np.ndarray, degree: int, kind: str = "legendre"):
    """Spatial basis values and derivatives, shape ``(len(x), n)``.

    ``legendre`` uses shifted Legendre polynomials of degree ``<= degree``;
    ``cosine`` uses ``{1, x, cos(k pi x), k = 1..degree}``.
    """
    if kind == "legendre":
        z = 2 * x - 1
        val = npleg.legvander(z, degree)
        der = np.zeros_like(val)
        for b in range(1, degree + 1):
            c = np.zeros(degree + 1)
            c[b] = 1.0
            der[:, b] = 2.0 * npleg.legval(z, npleg.legder(c))
        return val, der
    if kind == "cosine":
        k = np.arange(1, degree + 1)
        val = np.column_stack([np.ones_like(x), x, np.cos(np.pi * np.outer(x, k))])
        der = np.column_stack([np.zeros_like(x), np.ones_like(x), -np.pi * k * np.sin(np.pi * np.outer(x, k))])
        return val, der
    raise ValueError(f"unknown basis kind {kind!r}")


@dataclass
class VariationalResult:
    value: float
    coefficients: np.ndarray
    trace: list = field(default_factory=list)
    monotone: bool = True
    gradient_norm: float = 0.0
    n_time: int = 0
    degree: int = 0
    kind: str = "legendre"

    def field_on(self, u: DensityPath):
        """Maximizing field and its space gradient on the grid of ``u``."""
        ht = hat_values(u.times, self.n_time)
        val, der = space_basis(u.x, self.degree, self.kind)
        return ht @ self.coefficients @ val.T, ht @ self.coefficients @ der.T


class _Problem:
    def __init__(self, u: DensityPath, params: ReservoirParams, n_time: int, degree: int, kind: str):
        self.params = params
        v = u.values
        x = u.x
        ws = simpson_weights(x.size)
        wt = trapezoid_weights(u.times)
        ht = hat_values(u.times, n_time)
        val, der = space_basis(x, degree, kind)
        nb = val.shape[1]
        grad = u.gradient()
        sig = v * (1 - v)
        up = v @ (ws[:, None] * val)
        gp = grad @ (ws[:, None] * der)
        ends = np.outer(ht[-1], up[-1]) - np.outer(ht[0], up[0])
        mid = 0.5 * (up[1:] + up[:-1])
        dh = np.diff(ht, axis=0)
        lin = ends - dh.T @ mid + (wt[:, None] * ht).T @ gp
        self.lin = lin.ravel()
        s = np.einsum("im,mb,md->ibd", sig * ws, der, der, optimize=True)
        hh = (wt[:, None, None] * ht[:, :, None] * ht[:, None, :]).reshape(ht.shape[0], -1)
        q = hh.T @ s.reshape(s.shape[0], -1)
        nt = ht.shape[1]
        self.quad = q.reshape(nt, nt, nb, nb).transpose(0, 2, 1, 3).reshape(nt * nb, nt * nb)
        self.quad = 0.5 * (self.quad + self.quad.T)
        self.v0 = np.einsum("ia,b->iab", ht, val[0]).reshape(ht.shape[0], -1)
        self.v1 = np.einsum("ia,b->iab", ht, val[-1]).reshape(ht.shape[0], -1)
        self.u0, self.u1 = v[:, 0], v[:, -1]
        self.wt = wt
        self.shape = (nt, nb)

    def value(self, c):
        p = self.params
        h0, h1 = self.v0 @ c, self.v1 @ c
        bnd = boundary_b(p.alpha, p.cap_a, self.u0, h0) + boundary_b(p.beta, p.cap_b, self.u1, h1)
        return float(self.lin @ c - c @ self.quad @ c - self.wt @ bnd)

    def derivatives(self, c):
        p = self.params
        h0, h1 = self.v0 @ c, self.v1 @ c
        g = self.lin - 2 * self.quad @ c \
            - self.v0.T @ (self.wt * boundary_p(p.alpha, p.cap_a, self.u0, h0)) \
            - self.v1.T @ (self.wt * boundary_p(p.beta, p.cap_b, self.u1, h1))
        w0 = self.wt * boundary_p_prime(p.alpha, p.cap_a, self.u0, h0)
        w1 = self.wt * boundary_p_prime(p.beta, p.cap_b, self.u1, h1)
        neg_hess = 2 * self.quad + (self.v0.T * w0) @ self.v0 + (self.v1.T * w1) @ self.v1
        return g, neg_hess


def _solve_spd(mat, rhs):
    reg = 0.0
    scale = float(np.abs(np.diag(mat)).max()) or 1.0
    for _ in range(8):
        try:
            return cho_solve(cho_factor(mat + reg * np.eye(mat.shape[0])), rhs)
        except LinAlgError:
            reg = scale * 1e-14 if reg == 0 else reg * 100
    return rhs / scale


def rate_variational(u: DensityPath, params: ReservoirParams | None = None, n_time: int = 21,
                     degree: int = 10, kind: str = "legendre", max_iter: int = 100,
                     tol: float = 1e-13) -> VariationalResult:
    """Maximize the functional over ``hat_a(t) * phi_b(x)`` fields.

    The functional is concave, with an exactly quadratic interior part, so
    the ascent uses Newton directions with Armijo backtracking (factor 1/2)
    and falls back to the gradient when the Newton direction is not uphill.
    """
    params = params or u.params
    prob = _Problem(u, params, n_time, degree, kind)
    c = np.zeros(prob.lin.size)
    f = prob.value(c)
    trace = [f]
    gnorm = np.inf
    for _ in range(max_iter):
        g, nh = prob.derivatives(c)
        gnorm = float(np.linalg.norm(g))
        d = _solve_spd(nh, g)
        slope = float(g @ d)
        if slope <= 0:
            d, slope = g, gnorm ** 2
        if slope <= tol * (1 + abs(f)):
            break
        step = 1.0
        while step > 1e-12:
            fn = prob.value(c + step * d)
            if np.isfinite(fn) and fn >= f + 1e-4 * step * slope:
                break
            step *= 0.5
        else:
            break
        c = c + step * d
        f = fn
        trace.append(f)
    monotone = bool(np.all(np.diff(trace) >= -1e-12 * (1 + np.abs(trace[1:]))))
    if not monotone:
        warnings.warn("non-monotone ascent in rate_variational", AscentWarning, stacklevel=2)
    return VariationalResult(value=f, coefficients=c.reshape(prob.shape), trace=trace, monotone=monotone,
                             gradient_norm=gnorm, n_time=n_time, degree=degree, kind=kind)


DEFAULT_SCHEDULE = ((6, 2), (11, 4), (21, 6), (41, 10))


def variational_curve(u: DensityPath, params: ReservoirParams | None = None,
                      schedule=DEFAULT_SCHEDULE, kind: str = "legendre"):
    """Values of :func:`rate_variational` over a nested sequence of bases."""
    return [(nt, deg, rate_variational(u, params, nt, deg, kind).value) for nt, deg in schedule]
