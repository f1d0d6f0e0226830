"""The linear-minus-convex functional maximized by the rate function."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..boundary import boundary_b
from ..params import ReservoirParams
from ..pde.path import DensityPath
from ..quadrature import simpson_weights, trapezoid_weights
from .energy import energy

ENERGY_CAP = 1e8


@dataclass(frozen=True)
class JValue:
    """Value of the functional.

    ``in_domain`` is False when the path has non-finite or exploding energy;
    the value is then NaN and ``energy`` carries the measured energy.
    """

    value: float
    in_domain: bool
    energy: float


def field_on_path(field, u: DensityPath):
    """Sample a field and its space gradient on the grid of ``u``."""
    x = u.x
    hv = np.array([field.value(t, x) for t in u.times])
    hx = np.array([field.grad(t, x) for t in u.times])
    return hv, hx


def j_from_arrays(u: DensityPath, hv: np.ndarray, hx: np.ndarray, params: ReservoirParams) -> float:
    """Discrete functional for a field given on the grid of ``u``.

    Time integrals use the trapezoid rule, except the pairing with the time
    derivative of the field, which is summed by parts with exact increments.
    """
    v = u.values
    ws = simpson_weights(v.shape[1])
    wt = trapezoid_weights(u.times)
    grad = u.gradient()
    sig = v * (1 - v)
    ends = ws @ (v[-1] * hv[-1]) - ws @ (v[0] * hv[0])
    mid = 0.5 * (v[1:] + v[:-1])
    dpair = np.sum((mid * np.diff(hv, axis=0)) @ ws)
    inner = (grad * hx - sig * hx ** 2) @ ws
    bnd = boundary_b(params.alpha, params.cap_a, v[:, 0], hv[:, 0]) + \
        boundary_b(params.beta, params.cap_b, v[:, -1], hv[:, -1])
    return float(ends - dpair + wt @ (inner - bnd))


def functional_j(u: DensityPath, field, params: ReservoirParams | None = None) -> JValue:
    """Evaluate the functional for the path ``u`` and the tilt field ``field``."""
    params = params or u.params
    q, _ = energy(u)
    if not np.isfinite(q) or q > ENERGY_CAP or not np.all(np.isfinite(u.values)):
        return JValue(float("nan"), False, q)
    hv, hx = field_on_path(field, u)
    return JValue(j_from_arrays(u, hv, hx, params), True, q)
