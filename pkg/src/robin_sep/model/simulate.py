"""Exact event-driven simulation and Girsanov reweighting."""

from __future__ import annotations

import numpy as np

from ..params import ReservoirParams
from . import _kernels as K
from .field import TiltField
from .mollifier import bump_scaled
from .types import EmpiricalMeasure, JumpPath, LatticeConfiguration

CELL_WIDTH = 1e-4


def make_rng(seed) -> np.random.Generator:
    """Counter-based generator for one trajectory; accepts an int or a SeedSequence."""
    return np.random.Generator(np.random.Philox(seed))


class Simulator:
    """Reusable simulator for one lattice size, reservoir set and field.

    The field is tabulated once at the lattice sites; individual runs only
    differ by initial configuration and seed.
    """

    def __init__(self, n_scale: int, params: ReservoirParams, field: TiltField | None, horizon: float,
                 cell_width: float = CELL_WIDTH):
        if n_scale < 3:
            raise ValueError("N must be at least 3")
        if horizon < 0:
            raise ValueError("horizon must be nonnegative")
        self.n = int(n_scale)
        self.params = params
        self.field = field if field is not None else TiltField.zero()
        self.horizon = float(horizon)
        self.tilted = not self.field.is_zero
        if self.tilted:
            if not self.field.covers(horizon):
                raise ValueError(f"field {self.field.name!r} does not cover horizon {horizon}")
            self.table, self.cell_dt = self.field.tabulate(self.n, max(horizon, cell_width), cell_width)
            self.field.check_bounds(self.table, self.n)
        else:
            self.table, self.cell_dt = np.zeros((2, self.n - 1)), 1.0

    def _call(self, eta0, seed, record, checkpoints, start=0.0, end=None):
        p = self.params
        end = self.horizon if end is None else end
        ck = np.asarray(checkpoints if checkpoints is not None else [], dtype=float)
        return K.run_path(
            np.ascontiguousarray(eta0, dtype=np.int8), self.n, p.alpha, p.beta, p.cap_a, p.cap_b,
            float(start), float(end), self.table, self.cell_dt, self.tilted, self.tilted,
            float(self.field.grad_bound), float(self.field.value_bound), ck, make_rng(seed), record,
        )

    def run(self, initial: LatticeConfiguration, seed: int) -> JumpPath:
        if initial.n_scale != self.n:
            raise ValueError("initial configuration has the wrong size")
        et, ek, es, _, _, logw, _ = self._call(initial.occupancy, seed, True, None)
        return JumpPath(initial, et, ek, es, self.horizon, log_weight=float(logw) if self.tilted else 0.0,
                        rng_seed=int(seed), params=self.params, field_id=self.field.name)

    def snapshots(self, eta0: np.ndarray, seed: int, checkpoints):
        """Configurations at ``checkpoints`` and the log-weight, without an event log."""
        _, _, _, snaps, _, logw, counts = self._call(eta0, seed, False, checkpoints)
        return snaps, (float(logw) if self.tilted else 0.0), counts


def simulate(initial: LatticeConfiguration, params: ReservoirParams, field: TiltField | None = None,
             horizon: float = 1.0, seed: int = 0, cell_width: float = CELL_WIDTH) -> JumpPath:
    """Exact trajectory of the (possibly tilted) exclusion process on ``[0, horizon]``.

    Time-dependent rates are sampled by thinning a homogeneous Poisson clock
    whose rates dominate the tilted ones through the declared field bounds.
    """
    return Simulator(initial.n_scale, params, field, horizon, cell_width).run(initial, seed)


def girsanov_log_weight(path: JumpPath, params: ReservoirParams, field: TiltField,
                        cell_width: float = CELL_WIDTH) -> float:
    """Log-likelihood ratio of the tilted against the symmetric dynamics along ``path``.

    Raises
    ------
    ValueError
        If the field does not cover the time span of the path.
    """
    if field.is_zero:
        return 0.0
    if not field.covers(path.end_time):
        raise ValueError(f"field horizon {field.horizon} does not match path end {path.end_time}")
    n = path.n_scale
    table, cell_dt = field.tabulate(n, max(path.end_time, cell_width), cell_width)
    field.check_bounds(table, n)
    eta0 = np.ascontiguousarray(path.initial_config.occupancy, dtype=np.int8)
    return float(K.replay_weight(eta0, n, params.alpha, params.beta, params.cap_a, params.cap_b,
                                 path.start_time, path.end_time, table, cell_dt,
                                 np.ascontiguousarray(path.times), np.ascontiguousarray(path.kinds),
                                 np.ascontiguousarray(path.sites)))


def time_averaged_occupation(path: JumpPath) -> np.ndarray:
    """Time average of every site's occupation along the path."""
    eta0 = np.ascontiguousarray(path.initial_config.occupancy, dtype=np.int8)
    acc = K.occupation_integral(eta0, path.start_time, path.end_time,
                                np.ascontiguousarray(path.times), np.ascontiguousarray(path.kinds),
                                np.ascontiguousarray(path.sites))
    return acc / path.horizon


def sample_profile(gamma, n_scale: int, seed: int) -> LatticeConfiguration:
    """Product Bernoulli configuration with site densities ``gamma(k/N)``."""
    x = np.arange(1, n_scale) / n_scale
    g = np.broadcast_to(np.asarray(gamma(x) if callable(gamma) else gamma, dtype=float), x.shape)
    if np.any((g < 0) | (g > 1)):
        raise ValueError("profile must take values in [0, 1]")
    rng = np.random.Generator(np.random.Philox(int(seed)))
    return LatticeConfiguration.from_occupancy((rng.random(x.size) < g).astype(np.uint8))


def default_normalizer(epsilon: float) -> float:
    return 1.0 + epsilon


def empirical_density(measure, epsilon: float, u_eps: float | None = None, x=None) -> np.ndarray:
    """Smoothed empirical density ``U^-1 sum_atoms (1/N) phi_eps(y - x)``.

    Parameters
    ----------
    measure : EmpiricalMeasure or LatticeConfiguration
    epsilon : float
        Mollifier radius.
    u_eps : float, optional
        Normalizer, ``1 + epsilon`` by default.
    x : array, optional
        Evaluation points; a 1025-point grid by default.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    u_eps = default_normalizer(epsilon) if u_eps is None else float(u_eps)
    if u_eps <= 1:
        raise ValueError("normalizer must exceed 1")
    if not isinstance(measure, EmpiricalMeasure):
        measure = EmpiricalMeasure.from_config(measure)
    x = np.linspace(0.0, 1.0, 1025) if x is None else np.asarray(x, dtype=float)
    if measure.positions.size == 0:
        return np.zeros_like(x)
    k = bump_scaled(measure.positions[None, :] - x[:, None], epsilon)
    return k.sum(axis=1) / (measure.n_scale * u_eps)


def smoothing_matrix(n_scale: int, epsilon: float, x, u_eps: float | None = None) -> np.ndarray:
    """Linear map from site occupations to the smoothed density at ``x``."""
    u_eps = default_normalizer(epsilon) if u_eps is None else float(u_eps)
    sites = np.arange(1, n_scale) / n_scale
    return bump_scaled(sites[None, :] - np.asarray(x, float)[:, None], epsilon) / (n_scale * u_eps)
