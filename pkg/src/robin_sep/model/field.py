"""Space-time tilt fields ``H(t, x)`` driving the weakly asymmetric dynamics."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np
from scipy.interpolate import RegularGridInterpolator

Func = Callable[[float, np.ndarray], np.ndarray]


def _zeros(t, x):
    return np.zeros_like(np.asarray(x, dtype=float))


@dataclass(frozen=True)
class TiltField:
    """Evaluable field with declared sup-norm bounds.

    Parameters
    ----------
    value_fn, grad_fn, dt_fn : callable
        ``f(t, x)`` for scalar ``t`` and array ``x``; return arrays shaped like ``x``.
    value_bound, grad_bound : float
        Declared bounds on ``|H|`` and ``|dH/dx|`` over the horizon.
    name : str
        Identifier written to manifests.
    horizon : float, optional
        Last time at which the field is defined; ``None`` means all times.
    """

    value_fn: Func
    grad_fn: Func
    dt_fn: Func
    value_bound: float
    grad_bound: float
    name: str = "custom"
    horizon: Optional[float] = None
    is_zero: bool = False
    spec: dict = field(default_factory=dict, compare=False)

    def value(self, t: float, x) -> np.ndarray:
        return np.asarray(self.value_fn(float(t), np.asarray(x, dtype=float)), dtype=float)

    def grad(self, t: float, x) -> np.ndarray:
        return np.asarray(self.grad_fn(float(t), np.asarray(x, dtype=float)), dtype=float)

    def dt(self, t: float, x) -> np.ndarray:
        return np.asarray(self.dt_fn(float(t), np.asarray(x, dtype=float)), dtype=float)

    def covers(self, t_end: float, tol: float = 1e-12) -> bool:
        return self.horizon is None or t_end <= self.horizon + tol

    def tabulate(self, n_scale: int, horizon: float, cell_width: float = 1e-4):
        """Field values at lattice sites ``k/N`` on a uniform time grid.

        Returns
        -------
        table : ndarray, shape (n_cells + 1, N - 1)
        cell_dt : float
        """
        # cells are anchored at t = 0 with a fixed width, so paths cut at any
        # time are reweighted on the same grid
        n_cells = max(1, int(np.ceil(horizon / cell_width - 1e-9)))
        cell_dt = float(cell_width)
        sites = np.arange(1, n_scale) / n_scale
        table = np.empty((n_cells + 1, n_scale - 1))
        for j in range(n_cells + 1):
            table[j] = self.value(j * cell_dt, sites)
        return table, cell_dt

    def check_bounds(self, table: np.ndarray, n_scale: int, slack: float = 1e-12) -> None:
        """Raise if tabulated values break the declared bounds."""
        vmax = float(np.abs(table).max()) if table.size else 0.0
        if vmax > self.value_bound * (1 + slack) + slack:
            raise ValueError(
                f"field {self.name!r}: |H| reaches {vmax:.6g} above declared bound {self.value_bound:.6g}")
        if table.shape[1] > 1:
            gmax = float(np.abs(np.diff(table, axis=1)).max()) * n_scale
            if gmax > self.grad_bound * (1 + slack) + slack:
                raise ValueError(
                    f"field {self.name!r}: |grad H| reaches {gmax:.6g} above declared bound {self.grad_bound:.6g}")

    # presets ---------------------------------------------------------------

    @classmethod
    def zero(cls) -> "TiltField":
        return cls(_zeros, _zeros, _zeros, 0.0, 0.0, name="zero", is_zero=True, spec={"kind": "zero"})

    @classmethod
    def affine(cls, slope: float, offset: float = 0.0) -> "TiltField":
        slope, offset = float(slope), float(offset)
        return cls(
            lambda t, x: offset + slope * x,
            lambda t, x: np.full_like(x, slope),
            _zeros,
            value_bound=max(abs(offset), abs(offset + slope)),
            grad_bound=abs(slope),
            name=f"affine(slope={slope:g},offset={offset:g})",
            spec={"kind": "affine", "slope": slope, "offset": offset},
        )

    @classmethod
    def sine(cls, amplitude: float, mode: int = 1, ramp: Optional[float] = None) -> "TiltField":
        """``amplitude * sin(mode pi x) * min(t / ramp, 1)``; no ramp when ``ramp`` is None."""
        amp, k = float(amplitude), int(mode)
        if ramp is None:
            def r(t):
                return 1.0

            def dr(t):
                return 0.0
        else:
            tau = float(ramp)
            if tau <= 0:
                raise ValueError("ramp time must be positive")

            def r(t):
                return min(t / tau, 1.0)

            def dr(t):
                return 1.0 / tau if t < tau else 0.0
        w = k * np.pi
        return cls(
            lambda t, x: amp * r(t) * np.sin(w * x),
            lambda t, x: amp * r(t) * w * np.cos(w * x),
            lambda t, x: amp * dr(t) * np.sin(w * x),
            value_bound=abs(amp),
            grad_bound=abs(amp) * w,
            name=f"sine(amp={amp:g},mode={k},ramp={ramp})",
            spec={"kind": "sine", "amplitude": amp, "mode": k, "ramp": ramp},
        )

    @classmethod
    def tabulated(cls, times, xs, values, name: str = "tabulated") -> "TiltField":
        """Bilinear interpolation of gridded values ``values[i, j] = H(times[i], xs[j])``."""
        times = np.asarray(times, dtype=float)
        xs = np.asarray(xs, dtype=float)
        values = np.asarray(values, dtype=float)
        grad = np.gradient(values, xs, axis=1, edge_order=2) if xs.size > 2 else np.zeros_like(values)
        dtv = np.gradient(values, times, axis=0) if times.size > 1 else np.zeros_like(values)

        def make(tab):
            if times.size == 1:
                f = RegularGridInterpolator((xs,), tab[0], bounds_error=False, fill_value=None)
                return lambda t, x: f(np.atleast_1d(x)[:, None]).reshape(np.shape(x))
            f = RegularGridInterpolator((times, xs), tab, bounds_error=False, fill_value=None)

            def ev(t, x):
                x = np.asarray(x, dtype=float)
                pts = np.column_stack([np.full(x.size, t), x.ravel()])
                return f(pts).reshape(x.shape)
            return ev

        return cls(
            make(values), make(grad), make(dtv),
            value_bound=float(np.abs(values).max()),
            grad_bound=float(np.abs(np.diff(values, axis=1) / np.diff(xs)).max()) if xs.size > 1 else 0.0,
            name=name,
            horizon=float(times[-1]),
            spec={"kind": "tabulated", "name": name},
        )

    @classmethod
    def from_csv(cls, path) -> "TiltField":
        """Read a field from a CSV with columns ``t, x, H`` on a full tensor grid."""
        path = Path(path)
        with path.open(newline="") as fh:
            rows = [(float(r["t"]), float(r["x"]), float(r["H"])) for r in csv.DictReader(fh)]
        if not rows:
            raise ValueError(f"{path}: empty field table")
        arr = np.array(rows)
        times = np.unique(arr[:, 0])
        xs = np.unique(arr[:, 1])
        if times.size * xs.size != arr.shape[0]:
            raise ValueError(f"{path}: field table is not a full (t, x) grid")
        it = np.searchsorted(times, arr[:, 0])
        ix = np.searchsorted(xs, arr[:, 1])
        values = np.empty((times.size, xs.size))
        values[it, ix] = arr[:, 2]
        return cls.tabulated(times, xs, values, name=path.name)


def oracle_field() -> TiltField:
    """Ramped sine field used by the forward/inverse oracle loop."""
    return TiltField.sine(0.4, mode=1, ramp=0.1)
