"""Rate as the sum of an interior and a boundary variational problem."""

from __future__ import annotations

import numpy as np

from ..boundary import boundary_b, boundary_p, boundary_p_prime, boundary_q
from ..params import ReservoirParams
from ..pde.path import DensityPath
from ..quadrature import cumulative, simpson_weights, trapezoid_weights
from .direct import NewtonFailure
from .energy import energy
from .types import BoundaryDecomposition, RateBreakdown


def _shifted_costs(params, u0, u1):
    """Costs and derivatives of the shifted problem (``q`` in place of ``b``)."""
    al, be, A, B = params.alpha, params.beta, params.cap_a, params.cap_b

    def cost(x, y):
        return boundary_q(al, A, u0, x) + boundary_q(be, B, u1, y)

    def grad(x, y):
        return (boundary_p(al, A, u0, x) - (al - u0) / A,
                boundary_p(be, B, u1, y) - (be - u1) / B)

    return cost, grad


def _plain_costs(params, u0, u1):
    al, be, A, B = params.alpha, params.beta, params.cap_a, params.cap_b

    def cost(x, y):
        return boundary_b(al, A, u0, x) + boundary_b(be, B, u1, y)

    def grad(x, y):
        return boundary_p(al, A, u0, x), boundary_p(be, B, u1, y)

    return cost, grad


def legendre_boundary(a, b, zeta, params: ReservoirParams, u0, u1, shifted: bool = False,
                      tol: float = 1e-12, max_iter: int = 200):
    """Vectorized ``sup_{x,y} a x + b y - zeta (x-y)^2 - cost_0(x) - cost_1(y)``.

    The boundary costs are ``b`` (or ``q`` when ``shifted``). Damped Newton
    on the strictly concave objective with Armijo backtracking.

    Returns
    -------
    value, x, y : ndarray
    """
    a, b, zeta, u0, u1 = np.broadcast_arrays(*(np.asarray(z, dtype=float) for z in (a, b, zeta, u0, u1)))
    cost, cgrad = (_shifted_costs if shifted else _plain_costs)(params, u0, u1)
    al, be, A, B = params.alpha, params.beta, params.cap_a, params.cap_b
    x = np.zeros(a.shape)
    y = np.zeros(a.shape)

    def obj(x, y):
        return a * x + b * y - zeta * (x - y) ** 2 - cost(x, y)

    f = obj(x, y)
    for _ in range(max_iter):
        px, py = cgrad(x, y)
        gx = a - 2 * zeta * (x - y) - px
        gy = b + 2 * zeta * (x - y) - py
        hxx = 2 * zeta + boundary_p_prime(al, A, u0, x)
        hyy = 2 * zeta + boundary_p_prime(be, B, u1, y)
        det = hxx * hyy - 4 * zeta ** 2
        dx = (hyy * gx + 2 * zeta * gy) / det
        dy = (2 * zeta * gx + hxx * gy) / det
        slope = gx * dx + gy * dy
        if np.all(np.sqrt(gx ** 2 + gy ** 2) <= tol * (1 + np.abs(a) + np.abs(b))):
            break
        step = np.ones(a.shape)
        for _ in range(60):
            fn = obj(x + step * dx, y + step * dy)
            ok = np.isfinite(fn) & (fn >= f + 1e-4 * step * slope - 1e-15 * np.abs(f))
            if np.all(ok):
                break
            step = np.where(ok, step, 0.5 * step)
        x, y = x + step * dx, y + step * dy
        f = obj(x, y)
    px, py = cgrad(x, y)
    gn = np.hypot(a - 2 * zeta * (x - y) - px, b + 2 * zeta * (x - y) - py)
    if np.any(gn > 1e-8 * (1 + np.abs(a) + np.abs(b))):
        raise NewtonFailure(f"Legendre transform did not converge (gradient norm {gn.max():.3e})")
    return f, x, y


def envelope_bound(a, u, rho, d):
    """One-sided Legendre transform ``sup_x a x - b_{rho,d}(u, x)`` in closed form."""
    a = np.asarray(a, dtype=float)
    f = rho * (1 - u) / d
    g = u * (1 - rho) / d
    root = np.sqrt(a * a + 4 * f * g)
    return a * np.log((root + a) / (2 * f)) - root + f + g


def decompose(u: DensityPath, params: ReservoirParams) -> BoundaryDecomposition:
    v = u.clamped()
    sig = v * (1 - v)
    grad = u.gradient()
    dtu = u.time_derivative()
    ws = simpson_weights(v.shape[1])
    inv = 1.0 / sig
    z = inv @ ws
    xi = cumulative(inv, u.h, axis=1) / z[:, None]
    dxi = inv / z[:, None]
    p = -cumulative(dtu, u.h, axis=1)
    c = ((p * inv) @ ws) / z
    m = p - c[:, None]
    r = ((grad * inv) @ ws) ** 2 / z
    a_t = (dtu * (1 - xi)) @ ws - (grad * dxi) @ ws
    b_t = (dtu * xi) @ ws + (grad * dxi) @ ws
    return BoundaryDecomposition(xi=xi, zeta=1.0 / z, a_t=a_t, b_t=b_t, m_field=m, r_t=r)


def rate_decomposed(u: DensityPath, params: ReservoirParams | None = None,
                    time_smoothing: float = 0.0) -> RateBreakdown:
    """Rate as interior part plus boundary Legendre part."""
    params = params or u.params
    if time_smoothing > 0:
        u = u.smoothed_in_time(time_smoothing)
    dec = decompose(u, params)
    v = u.clamped()
    sig = v * (1 - v)
    grad = u.gradient()
    ws = simpson_weights(v.shape[1])
    wt = trapezoid_weights(u.times)
    bulk = 0.25 * (((dec.m_field + grad) ** 2 / sig) @ ws - dec.r_t)
    phi, x, y = legendre_boundary(dec.a_t, dec.b_t, dec.zeta, params, v[:, 0], v[:, -1])
    dec = BoundaryDecomposition(dec.xi, dec.zeta, dec.a_t, dec.b_t, dec.m_field, dec.r_t,
                                legendre_points=np.column_stack([x, y]))
    q, strong = energy(u)
    ib, ibd = float(wt @ bulk), float(wt @ phi)
    return RateBreakdown(
        i_total=ib + ibd, i_bulk=ib, i_boundary=ibd, times=u.times.copy(),
        bulk_integrand=bulk, boundary_integrand=phi, energy=q, strong_energy=strong,
        split="decomposition", decomposition=dec,
    )
