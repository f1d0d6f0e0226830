"""Free-energy balance and weak-form residuals of solved paths."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_trapezoid

from ..params import ReservoirParams
from ..quadrature import simpson_weights, trapezoid_weights
from .path import CLAMP, DensityPath


def entropy_density(r):
    """``F0(r) = r log r + (1 - r) log(1 - r)``."""
    r = np.clip(np.asarray(r, dtype=float), CLAMP, 1.0 - CLAMP)
    return r * np.log(r) + (1.0 - r) * np.log1p(-r)


def logit(r):
    r = np.clip(np.asarray(r, dtype=float), CLAMP, 1.0 - CLAMP)
    return np.log(r) - np.log1p(-r)


@dataclass(frozen=True)
class FreeEnergyLedger:
    """Cumulative dissipation against the drop of the entropy functional.

    ``lhs[i]`` is the dissipation integrated over ``[0, t_i]`` and ``rhs[i]``
    the decrease ``int F0(u_0) - int F0(u_{t_i})``.
    """

    times: np.ndarray
    bulk: np.ndarray
    boundary: np.ndarray
    rhs: np.ndarray

    @property
    def lhs(self) -> np.ndarray:
        return self.bulk + self.boundary

    @property
    def gap(self) -> np.ndarray:
        return self.lhs - self.rhs

    def window_cost(self, delta: float) -> float:
        """Absolute dissipation accumulated on ``[0, delta]``."""
        i = int(np.searchsorted(self.times, delta, side="right")) - 1
        return float(abs(self.bulk[i]) + abs(self.boundary[i]))


def free_energy_diagnostic(path: DensityPath, params: ReservoirParams | None = None,
                           touch_tol: float = 1e-9) -> FreeEnergyLedger:
    """Entropy balance of a solution of the hydrodynamic equation.

    Raises
    ------
    ValueError
        If the path touches 0 or 1 after the initial time.
    """
    params = params or path.params
    later = path.values[1:]
    if later.size and (later.min() <= touch_tol or later.max() >= 1.0 - touch_tol):
        raise ValueError("path touches {0, 1}; log-odds undefined")
    u = path.clamped()
    grad = path.gradient()
    w = simpson_weights(u.shape[1])
    bulk_rate = (grad ** 2 / (u * (1.0 - u))) @ w
    u0, u1 = u[:, 0], u[:, -1]
    bnd_rate = (u0 - params.alpha) * logit(u0) / params.cap_a + (u1 - params.beta) * logit(u1) / params.cap_b
    bulk = cumulative_trapezoid(bulk_rate, path.times, initial=0.0)
    bnd = cumulative_trapezoid(bnd_rate, path.times, initial=0.0)
    ent = entropy_density(u) @ w
    return FreeEnergyLedger(path.times.copy(), bulk, bnd, ent[0] - ent)


def weak_form_residual(path: DensityPath, test, field=None, params: ReservoirParams | None = None) -> float:
    """Residual of the weak formulation against a smooth test function.

    ``test`` provides ``value``, ``grad`` and ``dt`` methods of ``(t, x)``
    (a :class:`~robin_sep.model.field.TiltField` works). With ``field`` the
    controlled equation is tested, otherwise the hydrodynamic one.
    """
    params = params or path.params
    x, u = path.x, path.values
    ws = simpson_weights(x.size)
    wt = trapezoid_weights(path.times)
    grad = path.gradient()
    pair = np.empty(path.times.size)
    for i, t in enumerate(path.times):
        g, gx, gt = test.value(t, x), test.grad(t, x), test.dt(t, x)
        if field is None or getattr(field, "is_zero", False):
            h0 = h1 = 0.0
            drift = 0.0
        else:
            hv, hx = field.value(t, x), field.grad(t, x)
            h0, h1 = hv[0], hv[-1]
            drift = 2.0 * ws @ (u[i] * (1 - u[i]) * hx * gx)
        a0, a1 = u[i, 0], u[i, -1]
        p0 = (params.alpha * np.exp(h0) * (1 - a0) - (1 - params.alpha) * np.exp(-h0) * a0) / params.cap_a
        p1 = (params.beta * np.exp(h1) * (1 - a1) - (1 - params.beta) * np.exp(-h1) * a1) / params.cap_b
        pair[i] = ws @ (u[i] * gt) + g[0] * p0 + g[-1] * p1 - ws @ (grad[i] * gx) + drift
        if i == 0:
            start = ws @ (u[0] * g)
        if i == path.times.size - 1:
            end = ws @ (u[-1] * g)
    return float(end - start - wt @ pair)
