"""Monte Carlo checks linking the particle system to the macroscopic layer.

Every replica gets its own Philox stream spawned from one root seed, and
per-replica results are stored by index before reduction, so the output does
not depend on how replicas are scheduled across threads.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from scipy.special import logsumexp

from ..model.field import TiltField
from ..model.simulate import CELL_WIDTH, Simulator, default_normalizer, smoothing_matrix
from ..params import ReservoirParams
from ..pde.solvers import solve_controlled, solve_hydrodynamic
from ..rate.direct import rate_direct
from .reports import ConvergenceReport, EntropyReport, RareEventReport, ScaleResult, provenance

N_WINDOW = 181
SIGMA_K = 3.0


def replica_seeds(seed: int, count: int) -> list[tuple[int, int]]:
    """Two 64-bit keys per replica: one for the initial state, one for the dynamics."""
    out = []
    for child in np.random.SeedSequence(int(seed)).spawn(count):
        a, b = child.generate_state(2, dtype=np.uint64)
        out.append((int(a), int(b)))
    return out


def _map(fn, items, jobs: int):
    if jobs <= 1:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(fn, items))


def _initial(gamma, n: int, key: int) -> np.ndarray:
    x = np.arange(1, n) / n
    g = np.broadcast_to(np.asarray(gamma(x), dtype=float), x.shape)
    rng = np.random.Generator(np.random.Philox(key))
    return (rng.random(x.size) < g).astype(np.int8)


def _site_values(path, n: int, t: float) -> np.ndarray:
    return np.interp(np.arange(1, n) / n, path.x, path.at(t))


def _window(epsilon: float, n_points: int = N_WINDOW) -> np.ndarray:
    return np.linspace(epsilon, 1.0 - epsilon, n_points)


def _fsum_mean(a: np.ndarray) -> np.ndarray:
    """Replica mean along axis 0 with exactly rounded sums."""
    flat = a.reshape(a.shape[0], -1)
    return np.array([math.fsum(col) for col in flat.T]).reshape(a.shape[1:]) / a.shape[0]


def _scale_run(n, params, field, gamma, horizon, checkpoints, replicas, epsilon, seed, jobs, reference):
    sim = Simulator(n, params, field, horizon)
    keys = replica_seeds(seed, replicas)
    x = _window(epsilon)
    smat = smoothing_matrix(n, epsilon, x)

    def one(i):
        k0, k1 = keys[i]
        snaps, logw, counts = sim.snapshots(_initial(gamma, n, k0), k1, checkpoints)
        return (snaps.astype(float) @ smat.T), logw, counts

    res = _map(one, range(replicas), jobs)
    dens = np.stack([r[0] for r in res])  # (replica, checkpoint, point)
    mean = _fsum_mean(dens)
    se = dens.std(axis=0, ddof=1) / np.sqrt(replicas)
    ref = np.stack([smat @ _site_values(reference, n, t) for t in checkpoints])
    diff = mean - ref
    l2 = np.sqrt(np.trapezoid(diff ** 2, x, axis=1) / (x[-1] - x[0]))
    return ScaleResult(
        n_scale=n, replicas=replicas, checkpoints=list(map(float, checkpoints)),
        sup_error=float(np.abs(diff).max()), l2_error=[float(v) for v in l2],
        se_max=float(se.max()), radius=float(SIGMA_K * se.max()),
        max_density=float(dens.max()), density_bound=float(smat.sum(axis=1).max()),
        mean_events=float(np.mean([r[2][:3].sum() for r in res])),
    ), mean, ref


def _convergence(gamma, params, field, scales, horizon, replicas, epsilon, seed, jobs, tolerance, reference, kind):
    scales = [int(n) for n in scales]
    if any(b <= a for a, b in zip(scales, scales[1:])):
        raise ValueError("scales must be strictly increasing")
    checkpoints = np.array([horizon / 4, horizon / 2, horizon])
    results, profiles = [], {}
    for j, n in enumerate(scales):
        r, mean, ref = _scale_run(n, params, field, gamma, horizon, checkpoints, replicas, epsilon,
                                  seed + 7919 * j, jobs, reference)
        results.append(r)
        profiles[n] = (mean, ref)
    manifest = provenance(kind, params=params, field=field, seed=seed, scales=scales, horizon=horizon,
                          replicas=replicas, epsilon=epsilon, normalizer=default_normalizer(epsilon),
                          window_points=N_WINDOW, cell_width=CELL_WIDTH, pde_scheme=reference.scheme,
                          sigma_k=SIGMA_K)
    return ConvergenceReport(kind=kind, scales=results, tolerance=tolerance, sigma_k=SIGMA_K,
                             window=_window(epsilon), profiles=profiles, manifest=manifest)


def hydro_limit_check(gamma, params: ReservoirParams, scales=(64, 128, 256), T: float = 0.1,
                      replicas: int = 200, epsilon: float = 0.05, seed: int = 20240601, jobs: int = 1,
                      tolerance: float = 0.02, n_space: int = 1024, n_steps: int = 2048) -> ConvergenceReport:
    """Replica-averaged smoothed densities against the Robin heat equation.

    The PDE solution is sampled at the lattice sites and passed through the
    same smoothing map as the particles, so the comparison is free of
    mollification bias; errors are measured on ``[epsilon, 1 - epsilon]`` at
    ``T/4, T/2, T``.
    """
    ref = solve_hydrodynamic(gamma, params, T, n_space, n_steps)
    return _convergence(gamma, params, None, scales, T, replicas, epsilon, seed, jobs, tolerance, ref,
                        "hydro-limit")


def tilted_hydro_check(gamma, params: ReservoirParams, field: TiltField, scales=(64, 128, 256),
                       T: float = 0.2, replicas: int = 200, epsilon: float = 0.05, seed: int = 20240602,
                       jobs: int = 1, tolerance: float = 0.02, n_space: int = 1024,
                       n_steps: int = 2048) -> ConvergenceReport:
    """Same protocol as :func:`hydro_limit_check` with the tilted dynamics and PDE."""
    if field.is_zero:
        ref = solve_hydrodynamic(gamma, params, T, n_space, n_steps)
    else:
        ref = solve_controlled(gamma, params, field, T, n_space, n_steps)
    return _convergence(gamma, params, field, scales, T, replicas, epsilon, seed, jobs, tolerance, ref,
                        "tilted-hydro")


def _entropy_scale(gamma, params, field, n, horizon, replicas, seed, jobs):
    if field.is_zero:
        return np.zeros(replicas)
    sim = Simulator(n, params, field, horizon)
    keys = replica_seeds(seed, replicas)

    def one(i):
        k0, k1 = keys[i]
        return sim.snapshots(_initial(gamma, n, k0), k1, None)[1] / n

    return np.array(_map(one, range(replicas), jobs))


def entropy_identity_check(gamma, params: ReservoirParams, field: TiltField, n_scale: int = 256,
                           T: float = 0.5, replicas: int = 400, reference_scale: int | None = 128,
                           seed: int = 20240603, jobs: int = 1, tolerance: float = 0.15,
                           n_space: int = 512, n_steps: int = 2000) -> EntropyReport:
    """Mean normalized Girsanov log-weight under the tilted law against ``I(u^H)``.

    Both laws start from the same product measure, so the relative entropy
    comes from the dynamics alone. ``reference_scale`` adds a second, smaller
    lattice for the finite-size trend.
    """
    if field.is_zero:
        rate = 0.0
        scheme = "none"
    else:
        u = solve_controlled(gamma, params, field, T, n_space, n_steps)
        rate = rate_direct(u, params).i_total
        scheme = u.scheme
    scales = [n_scale] if reference_scale is None else [reference_scale, n_scale]
    rows = []
    for j, n in enumerate(scales):
        w = _entropy_scale(gamma, params, field, n, T, replicas, seed + 104729 * j, jobs)
        mean = math.fsum(w) / w.size
        se = float(w.std(ddof=1) / np.sqrt(w.size)) if w.size > 1 else float("nan")
        rows.append((n, mean, se))
    manifest = provenance("entropy", params=params, field=field, seed=seed, scales=scales, horizon=T,
                          replicas=replicas, pde_scheme=scheme, cell_width=CELL_WIDTH)
    return EntropyReport(rows=rows, rate_value=float(rate), tolerance=tolerance, manifest=manifest)


def rare_event_probe(gamma, params: ReservoirParams, target_field: TiltField, n_scale: int = 32,
                     T: float = 0.2, replicas: int = 400, ball_radius: float = 0.1,
                     proposal: TiltField | None = None, epsilon: float = 0.1, seed: int = 20240604,
                     jobs: int = 1, n_space: int = 512, n_steps: int = 1000) -> RareEventReport:
    """Importance-sampling estimate of the probability of a tube around ``u^H``.

    The tube is a ball in the mean over 8 checkpoints of the L1 distance
    between smoothed densities. The proposal defaults to the target field.
    """
    if n_scale > 64:
        raise ValueError("rare_event_probe is meant for N <= 64")
    proposal = target_field if proposal is None else proposal
    if target_field.is_zero:
        u = solve_hydrodynamic(gamma, params, T, n_space, n_steps)
    else:
        u = solve_controlled(gamma, params, target_field, T, n_space, n_steps)
    rate = 0.0 if target_field.is_zero else rate_direct(u, params).i_total
    ck = T * np.arange(1, 9) / 8
    x = np.linspace(0.0, 1.0, 201)
    smat = smoothing_matrix(n_scale, epsilon, x)
    target = np.stack([smat @ _site_values(u, n_scale, t) for t in ck])
    sim = Simulator(n_scale, params, proposal, T)
    keys = replica_seeds(seed, replicas)

    def one(i):
        k0, k1 = keys[i]
        snaps, logw, _ = sim.snapshots(_initial(gamma, n_scale, k0), k1, ck)
        d = np.trapezoid(np.abs(snaps.astype(float) @ smat.T - target), x, axis=1).mean()
        return d, logw

    res = _map(one, range(replicas), jobs)
    dist = np.array([r[0] for r in res])
    logw = np.array([r[1] for r in res])
    inside = dist <= ball_radius
    logv = np.where(inside, -logw, -np.inf)
    if inside.any():
        log_est = float(logsumexp(logv) - np.log(replicas))
        ess = float(np.exp(2 * logsumexp(logv) - logsumexp(2 * logv)))
    else:
        log_est, ess = float("-inf"), 0.0
    manifest = provenance("rare-event", params=params, field=target_field, proposal=proposal.name, seed=seed,
                          n_scale=n_scale, horizon=T, replicas=replicas, ball_radius=ball_radius,
                          epsilon=epsilon, checkpoints=ck.tolist())
    return RareEventReport(n_scale=n_scale, replicas=replicas, hits=int(inside.sum()), log_estimate=log_est,
                           ess=ess, rate_value=float(rate), distances=dist, manifest=manifest)
