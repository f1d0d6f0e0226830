"""Finite-volume Crank-Nicolson solvers for the Robin heat equations.

All three problems share one conservative scheme on the nodes ``x_j = j/M``
with half cells at the ends. The flux is ``J = -u' + 2 sigma(u) H'`` and the
boundary currents are affine in the trace,

    J(0) = p0(t) - q0(t) u(0),   -J(1) = p1(t) - q1(t) u(1),

so diffusion and boundary exchange are treated implicitly by a tridiagonal
Crank-Nicolson step, and the drift explicitly with a midpoint predictor.
The first two steps are replaced by four backward-Euler half steps to damp
incompatible initial data.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded

from ..model.field import TiltField
from ..params import ReservoirParams
from ..spectral import GridFunction, semigroup_apply, solve_eigenvalues
from .path import DensityPath


class NumericalFailure(RuntimeError):
    """The evolution could not be advanced within the retry budget."""


def stationary_profile(params: ReservoirParams, x=None):
    """Affine stationary density; returns a callable when ``x`` is None."""
    if x is None:
        return params.stationary_profile
    return params.stationary_profile(x)


@dataclass(frozen=True)
class _Reservoir:
    rho: float
    d: float

    def coefficients(self, h_bnd: float | None):
        """Return ``(p, q)`` with current ``p - q a``."""
        if h_bnd is None:
            return self.rho / self.d, 1.0 / self.d
        ep, em = np.exp(h_bnd), np.exp(-h_bnd)
        return self.rho * ep / self.d, (self.rho * ep + (1.0 - self.rho) * em) / self.d


def _profile_values(profile, x):
    if callable(profile):
        return np.broadcast_to(np.asarray(profile(x), dtype=float), x.shape).copy()
    v = np.asarray(profile, dtype=float)
    if v.shape != x.shape:
        raise ValueError(f"initial profile has {v.size} values, grid has {x.size}")
    return v.copy()


class _Scheme:
    def __init__(self, m: int, left: _Reservoir, right: _Reservoir, field: TiltField | None):
        self.m = m
        self.h = 1.0 / m
        self.x = np.linspace(0.0, 1.0, m + 1)
        w = np.full(m + 1, self.h)
        w[0] = w[-1] = 0.5 * self.h
        self.w = w
        self.left, self.right = left, right
        self.field = None if field is None or field.is_zero else field

    def _field(self, t):
        return None if self.field is None else self.field.value(t, self.x)

    def boundary(self, t):
        hv = self._field(t)
        if hv is None:
            return self.left.coefficients(None) + self.right.coefficients(None)
        return self.left.coefficients(hv[0]) + self.right.coefficients(hv[-1])

    def apply_linear(self, u, coef):
        """Diffusion plus boundary exchange, as a rate per unit length."""
        p0, q0, p1, q1 = coef
        flux = np.diff(u) / self.h
        out = np.zeros_like(u)
        out[:-1] += flux
        out[1:] -= flux
        out[0] += p0 - q0 * u[0]
        out[-1] += p1 - q1 * u[-1]
        return out

    def drift(self, u, t):
        hv = self._field(t)
        s = u * (1.0 - u)
        face = 0.5 * (s[1:] + s[:-1]) * 2.0 * np.diff(hv) / self.h
        out = np.zeros_like(u)
        out[:-1] -= face
        out[1:] += face
        return out

    def step(self, u, t, dt, theta):
        coef_new = self.boundary(t + dt)
        coef_old = self.boundary(t)
        p0, q0, p1, q1 = coef_new
        ab = np.zeros((3, self.m + 1))
        diag = self.w / dt + theta * 2.0 / self.h
        diag[0] = self.w[0] / dt + theta * (1.0 / self.h + q0)
        diag[-1] = self.w[-1] / dt + theta * (1.0 / self.h + q1)
        ab[1] = diag
        ab[0, 1:] = -theta / self.h
        ab[2, :-1] = -theta / self.h
        rhs = self.w / dt * u + (1.0 - theta) * self.apply_linear(u, coef_old)
        rhs[0] += theta * p0
        rhs[-1] += theta * p1
        if self.field is None:
            return solve_banded((1, 1), ab, rhs, overwrite_b=True, check_finite=False)
        tm = t + 0.5 * dt
        pred = solve_banded((1, 1), ab, rhs + self.drift(u, tm), check_finite=False)
        return solve_banded((1, 1), ab, rhs + self.drift(0.5 * (u + pred), tm),
                            overwrite_b=True, check_finite=False)

    def max_speed(self, t0, t1):
        if self.field is None:
            return 0.0
        return 2.0 * self.field.grad_bound


def _evolve(scheme: _Scheme, u0, horizon, n_steps, rannacher=4, max_halvings=8):
    times = np.linspace(0.0, horizon, n_steps + 1)
    dt = horizon / n_steps if n_steps else 0.0
    sub = 1
    v = scheme.max_speed(0.0, horizon)
    while v * dt / sub > scheme.h and sub < 2 ** max_halvings:
        sub *= 2
    for _ in range(max_halvings + 1):
        with np.errstate(over="ignore", invalid="ignore"):
            out, ok = _run(scheme, u0, times, sub, rannacher)
        if ok:
            return times, out, sub
        sub *= 2
    raise NumericalFailure(f"evolution unstable after {max_halvings} halvings of dt")


def _run(scheme, u0, times, sub, rannacher):
    out = np.empty((times.size, u0.size))
    out[0] = u0
    u = u0
    n_be = rannacher
    for i in range(times.size - 1):
        t, dt = times[i], (times[i + 1] - times[i]) / sub
        for k in range(sub):
            if n_be > 0:
                # two backward-Euler half steps in place of one step
                u = scheme.step(u, t, 0.5 * dt, 1.0)
                u = scheme.step(u, t + 0.5 * dt, 0.5 * dt, 1.0)
                n_be -= 2
            else:
                u = scheme.step(u, t, dt, 0.5)
            t += dt
            if scheme.field is not None and not -0.5 <= u.min() <= u.max() <= 1.5:
                return out, False
        if not np.all(np.isfinite(u)):
            return out, False
        out[i + 1] = u
    return out, True


def solve_hydrodynamic(gamma, params: ReservoirParams, horizon: float,
                       n_space: int = 512, n_steps: int = 2048, rannacher: int = 4) -> DensityPath:
    """Heat equation with the reservoir Robin conditions.

    Parameters
    ----------
    gamma : callable or array
        Initial profile, either ``gamma(x)`` or values on the ``n_space + 1`` nodes.
    horizon : float
        Final time ``T``.
    """
    scheme = _Scheme(n_space, _Reservoir(params.alpha, params.cap_a),
                     _Reservoir(params.beta, params.cap_b), None)
    u0 = _profile_values(gamma, scheme.x)
    times, vals, _ = _evolve(scheme, u0, horizon, n_steps, rannacher)
    return DensityPath(times, vals, params, f"fv-cn(M={n_space},L={n_steps},rannacher={rannacher})",
                       {"problem": "hydrodynamic"})


def solve_robin_homogeneous(phi, params: ReservoirParams, horizon: float, method: str = "fd",
                            n_space: int = 512, n_steps: int = 2048, n_modes: int = 128,
                            basis=None) -> DensityPath:
    """Heat equation with ``u(0) = A u'(0)`` and ``u(1) = -B u'(1)``.

    ``method="fd"`` uses the finite-volume scheme, ``method="spectral"`` the
    truncated eigenfunction expansion.
    """
    x = np.linspace(0.0, 1.0, n_space + 1)
    u0 = _profile_values(phi, x)
    if method == "fd":
        scheme = _Scheme(n_space, _Reservoir(0.0, params.cap_a), _Reservoir(0.0, params.cap_b), None)
        times, vals, _ = _evolve(scheme, u0, horizon, n_steps)
        return DensityPath(times, vals, params, f"fv-cn(M={n_space},L={n_steps})", {"problem": "robin-homogeneous"})
    if method == "spectral":
        basis = basis or solve_eigenvalues(params, n_modes)
        times = np.linspace(0.0, horizon, n_steps + 1)
        g = GridFunction(u0)
        phi_k = basis.values(x)
        from ..quadrature import simpson_weights

        c = phi_k.T @ (simpson_weights(x.size) * g.values)
        vals = np.exp(-np.outer(times, basis.eigenvalues)) * c @ phi_k.T
        if times.size > 1:
            semigroup_apply(basis, times[1], g)  # emits the truncation warning if needed
        return DensityPath(times, vals, params, f"spectral(K={basis.truncation})", {"problem": "robin-homogeneous"})
    raise ValueError(f"unknown method {method!r}")


def solve_controlled(gamma, params: ReservoirParams, field: TiltField, horizon: float,
                     n_space: int = 512, n_steps: int = 2048, rannacher: int = 4) -> DensityPath:
    """Tilted hydrodynamic equation ``u_t = u'' - 2 (sigma(u) H')'`` with field-dependent boundary currents.

    The boundary currents are affine in the trace, so each implicit step is a
    single tridiagonal solve; the drift uses a midpoint predictor. The time
    step is halved when the explicit drift violates the CFL bound or the
    solution leaves a neighborhood of [0, 1].
    """
    if field.horizon is not None and horizon > field.horizon + 1e-12:
        raise ValueError(f"field defined up to {field.horizon}, solve requested to {horizon}")
    scheme = _Scheme(n_space, _Reservoir(params.alpha, params.cap_a),
                     _Reservoir(params.beta, params.cap_b), field)
    u0 = _profile_values(gamma, scheme.x)
    times, vals, sub = _evolve(scheme, u0, horizon, n_steps, rannacher)
    return DensityPath(times, vals, params, f"fv-cn-drift(M={n_space},L={n_steps},sub={sub})",
                       {"problem": "controlled", "field": field.name})


def boundary_currents(path: DensityPath, field: TiltField | None = None) -> np.ndarray:
    """Net inflow ``p_alpha + p_beta`` from both reservoirs at every time node."""
    p = path.params
    out = np.empty(path.times.size)
    for i, t in enumerate(path.times):
        if field is None or field.is_zero:
            h0 = h1 = 0.0
        else:
            hv = field.value(t, np.array([0.0, 1.0]))
            h0, h1 = hv
        a0, a1 = path.values[i, 0], path.values[i, -1]
        out[i] = (p.alpha * np.exp(h0) * (1 - a0) - (1 - p.alpha) * np.exp(-h0) * a0) / p.cap_a + \
                 (p.beta * np.exp(h1) * (1 - a1) - (1 - p.beta) * np.exp(-h1) * a1) / p.cap_b
    return out


def mass(path: DensityPath) -> np.ndarray:
    """Trapezoid mass on the solver nodes (the scheme's conserved quantity)."""
    w = np.full(path.values.shape[1], path.h)
    w[0] = w[-1] = 0.5 * path.h
    return path.values @ w
