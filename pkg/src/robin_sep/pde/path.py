"""Density paths on a space-time grid."""

from __future__ import annotations

import csv
import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..params import ReservoirParams

FORMAT_VERSION = 1
_MAGIC = b"RSEPPATH"
CLAMP = 1e-12


@dataclass(frozen=True)
class DensityPath:
    """Values ``u(t_i, x_j)`` on a uniform space grid ``x_j = j / M``.

    Attributes
    ----------
    times : ndarray, shape (L + 1,)
        Increasing time nodes; ``times[0]`` is usually 0.
    values : ndarray, shape (L + 1, M + 1)
    params : ReservoirParams, optional
    scheme : str
        Free-form description of how the path was produced.
    """

    times: np.ndarray
    values: np.ndarray
    params: ReservoirParams | None = None
    scheme: str = ""
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        t = np.array(self.times, dtype=float)
        v = np.array(self.values, dtype=float)
        if v.ndim != 2 or t.ndim != 1 or v.shape[0] != t.size:
            raise ValueError(f"shape mismatch: times {t.shape}, values {v.shape}")
        if t.size > 1 and np.any(np.diff(t) <= 0):
            raise ValueError("time grid must be strictly increasing")
        if v.shape[1] < 3:
            raise ValueError("space grid needs at least 3 nodes")
        t.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v)

    @property
    def n_intervals(self) -> int:
        return self.values.shape[1] - 1

    @property
    def h(self) -> float:
        return 1.0 / self.n_intervals

    @property
    def x(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.values.shape[1])

    @property
    def horizon(self) -> float:
        return float(self.times[-1] - self.times[0])

    @property
    def trace_left(self) -> np.ndarray:
        return self.values[:, 0]

    @property
    def trace_right(self) -> np.ndarray:
        return self.values[:, -1]

    def at(self, t: float) -> np.ndarray:
        """Profile at time ``t`` by linear interpolation between stored slices."""
        i = np.searchsorted(self.times, t)
        if i < self.times.size and abs(self.times[i] - t) <= 1e-12 * max(1.0, abs(t)):
            return self.values[i]
        if i == 0 or i >= self.times.size:
            raise ValueError(f"t={t} outside [{self.times[0]}, {self.times[-1]}]")
        w = (t - self.times[i - 1]) / (self.times[i] - self.times[i - 1])
        return (1 - w) * self.values[i - 1] + w * self.values[i]

    def gradient(self) -> np.ndarray:
        """Space derivative, second order including the boundary nodes."""
        return np.gradient(self.values, self.h, axis=1, edge_order=2)

    def time_derivative(self) -> np.ndarray:
        """Time derivative: centered inside, second-order one-sided at the ends."""
        if self.times.size < 3:
            return np.gradient(self.values, self.times, axis=0)
        return np.gradient(self.values, self.times, axis=0, edge_order=2)

    def clamped(self, eps: float = CLAMP) -> np.ndarray:
        return np.clip(self.values, eps, 1.0 - eps)

    def within_unit(self, slack: float = 1e-9) -> bool:
        return bool(self.values.min() >= -slack and self.values.max() <= 1.0 + slack)

    def window(self, t0: float, t1: float, shift: bool = True) -> "DensityPath":
        """Restriction to ``[t0, t1]``; both ends must be time nodes."""
        i0 = self._node(t0)
        i1 = self._node(t1)
        if i1 <= i0:
            raise ValueError("empty window")
        t = self.times[i0 : i1 + 1]
        if shift:
            t = t - t[0]
        return DensityPath(t, self.values[i0 : i1 + 1], self.params, self.scheme, dict(self.meta))

    def _node(self, t):
        i = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[i] - t) > 1e-9 * max(1.0, abs(t)):
            raise ValueError(f"t={t} is not a time node")
        return i

    def smoothed_in_time(self, width: float) -> "DensityPath":
        """Convolve in time with the bump mollifier, reflecting at the ends."""
        from ..model.mollifier import bump

        if width <= 0:
            return self
        dt = float(np.mean(np.diff(self.times)))
        k = int(np.ceil(width / dt))
        r = np.arange(-k, k + 1) * dt
        w = bump(r / width)
        w = w / w.sum()
        pad = np.concatenate([2 * self.values[:1] - self.values[k:0:-1], self.values,
                              2 * self.values[-1:] - self.values[-2 : -k - 2 : -1]])
        out = np.empty_like(self.values)
        for i in range(self.times.size):
            out[i] = w @ pad[i : i + 2 * k + 1]
        return DensityPath(self.times, out, self.params, self.scheme + "+time-mollified", dict(self.meta))

    # serialization ---------------------------------------------------------

    def header(self) -> dict:
        return {
            "version": FORMAT_VERSION,
            "n_times": int(self.times.size),
            "n_space": int(self.values.shape[1]),
            "t0": float(self.times[0]),
            "t1": float(self.times[-1]),
            "params": self.params.to_dict() if self.params is not None else None,
            "scheme": self.scheme,
            "meta": self.meta,
        }

    def to_csv(self, path) -> Path:
        path = Path(path)
        x = self.x
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t", "x", "u"])
            for t, row in zip(self.times, self.values):
                ts = "%.17g" % t
                w.writerows((ts, "%.17g" % xi, "%.17g" % ui) for xi, ui in zip(x, row))
        return path

    def save(self, path) -> Path:
        """Binary dump: magic, header length, JSON header, float64 times and values."""
        path = Path(path)
        head = json.dumps(self.header(), sort_keys=True).encode()
        with path.open("wb") as fh:
            fh.write(_MAGIC)
            fh.write(struct.pack("<Q", len(head)))
            fh.write(head)
            fh.write(self.times.astype("<f8").tobytes())
            fh.write(self.values.astype("<f8").tobytes())
        return path

    @classmethod
    def load(cls, path) -> "DensityPath":
        raw = Path(path).read_bytes()
        if raw[:8] != _MAGIC:
            raise ValueError(f"{path}: not a density path dump")
        (n,) = struct.unpack("<Q", raw[8:16])
        head = json.loads(raw[16 : 16 + n])
        if head["version"] != FORMAT_VERSION:
            raise ValueError(f"{path}: unsupported version {head['version']}")
        nt, nx = head["n_times"], head["n_space"]
        body = np.frombuffer(raw, dtype="<f8", offset=16 + n)
        if body.size != nt * (nx + 1):
            raise ValueError(f"{path}: truncated dump")
        params = ReservoirParams(**head["params"]) if head["params"] else None
        return cls(body[:nt].copy(), body[nt:].reshape(nt, nx).copy(), params, head["scheme"], head["meta"])
