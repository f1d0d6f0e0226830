"""Microscopic configurations, jump paths and empirical measures."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from ..params import ReservoirParams

KIND_NAMES = ("exchange", "left", "right")


@dataclass(frozen=True, eq=False)
class LatticeConfiguration:
    """Occupation variables on the sites ``k/N``, ``k = 1..N-1``, stored as packed bits."""

    n_scale: int
    packed: bytes = field(repr=False)

    def __post_init__(self):
        if self.n_scale < 3:
            raise ValueError(f"N must be at least 3, got {self.n_scale}")
        if len(self.packed) != (self.n_scale - 1 + 7) // 8:
            raise ValueError("packed occupancy has the wrong length")

    @classmethod
    def from_occupancy(cls, occupancy, n_scale: int | None = None) -> "LatticeConfiguration":
        occ = np.asarray(occupancy)
        n = occ.size + 1 if n_scale is None else int(n_scale)
        if occ.ndim != 1 or occ.size != n - 1:
            raise ValueError(f"occupancy must have length N-1={n - 1}, got {occ.shape}")
        if not np.all((occ == 0) | (occ == 1)):
            raise ValueError("occupancy entries must be 0 or 1")
        return cls(n, np.packbits(occ.astype(np.uint8)).tobytes())

    @classmethod
    def empty(cls, n_scale: int) -> "LatticeConfiguration":
        return cls.from_occupancy(np.zeros(n_scale - 1, np.uint8))

    @property
    def occupancy(self) -> np.ndarray:
        bits = np.unpackbits(np.frombuffer(self.packed, np.uint8), count=self.n_scale - 1)
        bits.setflags(write=False)
        return bits

    @property
    def sites(self) -> np.ndarray:
        return np.arange(1, self.n_scale) / self.n_scale

    def particle_count(self) -> int:
        return int(self.occupancy.sum())

    def __eq__(self, other):
        return isinstance(other, LatticeConfiguration) and self.n_scale == other.n_scale and self.packed == other.packed

    def __hash__(self):
        return hash((self.n_scale, self.packed))


@dataclass(frozen=True, eq=False)
class JumpPath:
    """Event log of a trajectory on ``[start_time, end_time]``.

    Events are stored column-wise: ``times`` (strictly increasing),
    ``kinds`` (0 exchange, 1 left flip, 2 right flip) and ``sites``
    (1-based; the left site of the bond for exchanges).
    """

    initial_config: LatticeConfiguration
    times: np.ndarray
    kinds: np.ndarray
    sites: np.ndarray
    end_time: float
    log_weight: float = 0.0
    rng_seed: int = 0
    start_time: float = 0.0
    params: ReservoirParams | None = None
    field_id: str = "zero"

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        if t.size > 1 and np.any(np.diff(t) <= 0):
            raise ValueError("event times must be strictly increasing")
        if t.size and (t[0] < self.start_time or t[-1] > self.end_time):
            raise ValueError("event times outside the path horizon")
        for name, arr, dt in (("times", t, float), ("kinds", self.kinds, np.int8), ("sites", self.sites, np.int32)):
            a = np.asarray(arr, dtype=dt)
            a.setflags(write=False)
            object.__setattr__(self, name, a)

    @property
    def n_scale(self) -> int:
        return self.initial_config.n_scale

    @property
    def horizon(self) -> float:
        return self.end_time - self.start_time

    def __len__(self) -> int:
        return int(self.times.size)

    @property
    def events(self) -> Iterator[tuple[float, str, int]]:
        for t, k, s in zip(self.times, self.kinds, self.sites):
            yield float(t), KIND_NAMES[k], int(s)

    def state_at(self, t: float) -> np.ndarray:
        """Configuration after all events at times ``<= t``."""
        eta = self.initial_config.occupancy.astype(np.int8).copy()
        stop = np.searchsorted(self.times, t, side="right")
        for k, s in zip(self.kinds[:stop], self.sites[:stop]):
            if k == 0:
                eta[s - 1], eta[s] = eta[s], eta[s - 1]
            else:
                eta[s - 1] = 1 - eta[s - 1]
        return eta

    def split(self, t: float) -> tuple["JumpPath", "JumpPath"]:
        """Cut the path at a deterministic time into two consecutive pieces."""
        if not self.start_time <= t <= self.end_time:
            raise ValueError("split time outside the horizon")
        i = int(np.searchsorted(self.times, t, side="right"))
        mid = LatticeConfiguration.from_occupancy(self.state_at(t))
        common = dict(rng_seed=self.rng_seed, params=self.params, field_id=self.field_id, log_weight=float("nan"))
        a = JumpPath(self.initial_config, self.times[:i], self.kinds[:i], self.sites[:i], t,
                     start_time=self.start_time, **common)
        b = JumpPath(mid, self.times[i:], self.kinds[i:], self.sites[i:], self.end_time, start_time=t, **common)
        return a, b

    def __eq__(self, other):
        if not isinstance(other, JumpPath):
            return NotImplemented
        return (self.initial_config == other.initial_config and np.array_equal(self.times, other.times)
                and np.array_equal(self.kinds, other.kinds) and np.array_equal(self.sites, other.sites)
                and self.end_time == other.end_time and self.start_time == other.start_time
                and (self.log_weight == other.log_weight
                     or (np.isnan(self.log_weight) and np.isnan(other.log_weight))))


@dataclass(frozen=True)
class EmpiricalMeasure:
    """Atoms of mass ``1/N`` at the occupied sites."""

    n_scale: int
    positions: np.ndarray

    @classmethod
    def from_config(cls, config) -> "EmpiricalMeasure":
        if isinstance(config, LatticeConfiguration):
            n, occ = config.n_scale, config.occupancy
        else:
            occ = np.asarray(config)
            n = occ.size + 1
        pos = (np.flatnonzero(occ) + 1) / n
        pos.setflags(write=False)
        return cls(n, pos)

    @property
    def mass(self) -> float:
        return self.positions.size / self.n_scale

    def integrate(self, func) -> float:
        return float(np.sum(func(self.positions)) / self.n_scale)
