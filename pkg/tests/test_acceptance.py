"""The nine acceptance criteria, each printed as one PASS/FAIL line."""

import time
import warnings

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from robin_sep.boundary import boundary_b, boundary_c, boundary_p, boundary_q
from robin_sep.cli import main
from robin_sep.experiments import entropy_identity_check, hydro_limit_check, tilted_hydro_check
from robin_sep.model import TiltField, oracle_field
from robin_sep.params import ReservoirParams
from robin_sep.pde import free_energy_diagnostic, solve_controlled, solve_hydrodynamic, solve_robin_homogeneous
from robin_sep.quadrature import gauss_legendre_composite
from robin_sep.rate import (
    field_on_path,
    functional_j,
    path_cost_algebra_check,
    rate_decomposed,
    rate_direct,
    rate_variational,
    variational_curve,
)
from robin_sep.spectral import (
    TruncationWarning,
    green_apply,
    l2_norm,
    semigroup_apply,
    semigroup_gradient,
    solve_eigenvalues,
)

P = ReservoirParams(0.2, 0.8, 1.0, 1.0)


def record(n, title, checks, elapsed, budget):
    """Print and store one line; ``checks`` maps a label to ``(ok, detail)``."""
    timing_ok = elapsed < budget
    ok = all(c[0] for c in checks.values()) and timing_ok
    detail = "; ".join(f"{k}={v[1]}" + ("" if v[0] else " FAIL") for k, v in checks.items())
    line = f"criterion {n} {'PASS' if ok else 'FAIL'}: {title} [{elapsed:.1f}s / {budget:.0f}s] {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert ok, line


def g(x):
    return f"{x:.3g}"


def step(x):
    return (np.asarray(x) < 0.5).astype(float)


def test_criterion_1_boundary_costs():
    t0 = time.perf_counter()
    r = np.random.default_rng(2024)
    n = 10_000
    rho, d, a, m = r.uniform(0.01, 0.99, n), r.uniform(0.1, 5, n), r.uniform(0, 1, n), r.uniform(-3, 3, n)
    h = 1e-5
    b, p = boundary_b(rho, d, a, m), boundary_p(rho, d, a, m)
    fd = (boundary_b(rho, d, a, m + h) - boundary_b(rho, d, a, m - h)) / (2 * h)
    scale = 1 + np.abs(b) + np.abs(m * p)
    e_p = np.abs(fd - p).max()
    e_c = (np.abs(boundary_c(rho, d, a, m) - (m * p - b)) / scale).max()
    q = boundary_q(rho, d, a, m)
    e_q = (np.abs(q - (b - m * (rho - a) / d)) / scale).max()
    q0 = boundary_q(rho, d, a, np.zeros(n))
    record(1, "boundary-cost algebra", {
        "fd_p": (e_p < 1e-6, g(e_p)),
        "c_identity": (e_c < 1e-14, g(e_c)),
        "q_identity": (e_q < 1e-14, g(e_q)),
        "q_nonneg": (q.min() >= 0, g(q.min())),
        "q_zero_at_0": (np.all(q0 == 0), g(np.abs(q0).max())),
    }, time.perf_counter() - t0, 1.0)


def test_criterion_2_spectral():
    t0 = time.perf_counter()
    xq, wq = gauss_legendre_composite(512, 16)
    x = np.linspace(0, 1, 4097)
    xf = np.linspace(0, 1, 8193)
    r = np.random.default_rng(7)
    worst = dict(res=0.0, gram=0.0, green=0.0, contr=-np.inf, comm=0.0)
    for cap_a, cap_b in [(1.0, 1.0), (0.5, 2.0), (3.0, 0.2)]:
        basis = solve_eigenvalues(ReservoirParams(0.3, 0.6, cap_a, cap_b), 128)
        worst["res"] = max(worst["res"], basis.residuals.max())
        phi = basis.values(xq)
        worst["gram"] = max(worst["gram"], np.abs(phi.T @ (wq[:, None] * phi) - np.eye(128)).max())
        pv = basis.values(x)
        for j in range(128):
            kf = green_apply(basis.params, pv[:, j]).values
            worst["green"] = max(worst["green"], np.abs(kf - pv[:, j] / basis.eigenvalues[j]).max())
        k = np.arange(1, 21)
        for _ in range(20):
            c = r.normal(size=20) / k
            f = np.cos(np.pi * np.outer(x, k) * r.uniform(0.5, 1.5, 20)) @ c + r.normal()
            for t in (1e-3, 1e-2, 0.1, 1.0):
                ratio = l2_norm(semigroup_apply(basis, t, f)) / l2_norm(f) - 1
                worst["contr"] = max(worst["contr"], ratio)
        f = np.sin(np.pi * xf) + xf ** 2 * (1 - xf)
        df = np.pi * np.cos(np.pi * xf) + 2 * xf - 3 * xf ** 2
        for t in (1e-3, 1e-2, 0.1, 1.0):
            e = np.abs(semigroup_gradient(basis, t, f, "dirichlet").values
                       - semigroup_apply(basis, t, df, "neumann").values).max()
            worst["comm"] = max(worst["comm"], e)
    record(2, "spectral layer, K=128, three (A,B) pairs", {
        "residual": (worst["res"] < 1e-8, g(worst["res"])),
        "gram": (worst["gram"] < 1e-8, g(worst["gram"])),
        "green": (worst["green"] < 1e-6, g(worst["green"])),
        "contraction_excess": (worst["contr"] <= 1e-12, g(worst["contr"])),
        "dirichlet_neumann": (worst["comm"] < 1e-6, g(worst["comm"])),
    }, time.perf_counter() - t0, 10.0)


def test_criterion_3_pde():
    t0 = time.perf_counter()
    smooth = lambda x: np.cos(np.pi * x) + x
    fd = solve_robin_homogeneous(smooth, P, 0.1, "fd", 512, 2048)
    with warnings.catch_warnings():
        # the first time node is below the resolution of 128 modes
        warnings.simplefilter("ignore", TruncationWarning)
        sp = solve_robin_homogeneous(smooth, P, 0.1, "spectral", 512, 2048, n_modes=128)
    l2 = np.sqrt(np.mean((fd.values[1:] - sp.values[1:]) ** 2, axis=1)).max()
    u = [solve_robin_homogeneous(smooth, P, 0.1, "fd", m, m).values[-1][:: m // 128] for m in (128, 256, 512)]
    order = np.log2(np.sqrt(np.mean((u[0] - u[1]) ** 2)) / np.sqrt(np.mean((u[1] - u[2]) ** 2)))
    hyd = solve_hydrodynamic(step, P, 0.1, 512, 2048)
    hom = solve_robin_homogeneous(lambda x: 1.0 + x * (1 - x), P, 0.1, "fd", 512, 2048)
    mp = bool(hyd.values.min() >= min(0.0, P.alpha) and hyd.values.max() <= max(1.0, P.beta)
              and hom.values.min() >= 0 and hom.values.max() <= 1.25 + 1e-12)
    far = solve_hydrodynamic(step, P, 10.0, 512, 2000)
    e_inf = np.abs(far.values[-1] - P.stationary_profile(far.x)).max()
    led = free_energy_diagnostic(solve_hydrodynamic(lambda x: np.full_like(x, 0.5), P, 0.5, 512, 2000), P)
    gap = np.abs(led.gap).max()
    record(3, "PDE cross-solver", {
        "fd_vs_spectral_L2": (l2 < 1e-4, g(l2)),
        "richardson_order": (order >= 1.9, g(order)),
        "maximum_principle": (mp, mp),
        "u10_vs_stationary": (e_inf < 1e-6, g(e_inf)),
        "free_energy_gap": (gap < 1e-3, g(gap)),
    }, time.perf_counter() - t0, 30.0)


def test_criterion_4_rate_oracle():
    t0 = time.perf_counter()
    f = oracle_field()
    u = solve_controlled(P.stationary_profile, P, f, 0.5, 512, 2000)
    direct = rate_direct(u, P)
    hv, hx = field_on_path(f, u)
    e_grad = np.abs(direct.field_grad - hx).max()
    e_bnd = max(np.abs(direct.field_left - hv[:, 0]).max(), np.abs(direct.field_right - hv[:, -1]).max())
    ival = direct.i_total
    j = functional_j(u, f, P).value
    curve = variational_curve(u, P)
    vals = [c[2] for c in curve]
    climbs = bool(np.all(np.diff(vals) >= -1e-10))
    dec = rate_decomposed(u, P)
    hyd = solve_hydrodynamic(P.stationary_profile, P, 0.5, 512, 2000)
    zero = max(abs(rate_direct(hyd, P).i_total), abs(rate_decomposed(hyd, P).i_total),
               abs(rate_variational(hyd, P, 11, 4).value))
    record(4, f"rate oracle loop, I={ival:.8g}", {
        "grad_H": (e_grad < 1e-3, g(e_grad)),
        "boundary_H": (e_bnd < 1e-3, g(e_bnd)),
        "I_positive": (ival > 0, g(ival)),
        "J_minus_I": (abs(j - ival) < 1e-3, g(j - ival)),
        "variational_curve": (climbs and ival - vals[-1] < 1e-3, " ".join(f"{v:.8f}" for v in vals)),
        "decomposed_minus_I": (abs(dec.i_total - ival) < 1e-3, g(dec.i_total - ival)),
        "hydrodynamic_max": (zero <= 1e-8, g(zero)),
    }, time.perf_counter() - t0, 120.0)


def test_criterion_5_path_cost_algebra():
    t0 = time.perf_counter()
    u = solve_controlled(P.stationary_profile, P, oracle_field(), 0.5, 512, 2000)
    rep = path_cost_algebra_check(u, 0.25, P)
    record(5, "path-cost algebra, S=T/2", {
        "subadditive": (rep.subadditive, f"{g(rep.i_full)}<={g(rep.i_head)}+{g(rep.i_tail)}"),
        "head_monotone": (rep.head_monotone, g(rep.i_head)),
        "tail_monotone": (rep.tail_monotone, g(rep.i_tail)),
        "tol": (True, g(rep.tol)),
    }, time.perf_counter() - t0, 30.0)


def _convergence_checks(rep):
    out = {f"N{s.n_scale}": (True, f"{g(s.sup_error)}+-{g(s.radius)}") for s in rep.scales}
    out["monotone"] = (rep.monotone(), rep.monotone())
    last = rep.scales[-1]
    out["final"] = (rep.final_ok(), f"{g(last.sup_error)}<=0.02+{g(last.radius)}")
    out["bounded"] = (all(s.max_density <= s.density_bound + 1e-12 for s in rep.scales), "ok")
    return out


@pytest.mark.slow
def test_criterion_6_hydrodynamic_limit():
    t0 = time.perf_counter()
    rep = hydro_limit_check(step, P, (64, 128, 256), 0.1, 200, 0.05)
    record(6, "hydrodynamic limit, step profile", _convergence_checks(rep), time.perf_counter() - t0, 600.0)


@pytest.mark.slow
def test_criterion_7_tilted_hydrodynamics():
    t0 = time.perf_counter()
    rep = tilted_hydro_check(step, P, oracle_field(), (64, 128, 256), 0.2, 200, 0.05)
    record(7, "tilted hydrodynamics, oracle field, T=0.2", _convergence_checks(rep), time.perf_counter() - t0,
           600.0)


@pytest.mark.slow
def test_criterion_8_entropy_identity():
    t0 = time.perf_counter()
    rep = entropy_identity_check(P.stationary_profile, P, oracle_field(), 256, 0.5, 400, 128)
    (n0, m0, s0), (n1, m1, s1) = rep.rows
    record(8, f"entropy identity, I={rep.rate_value:.6g}", {
        f"mean_N{n0}": (True, f"{m0:.6g}+-{s0:.2g}"),
        f"mean_N{n1}": (True, f"{m1:.6g}+-{s1:.2g}"),
        "relative_gap": (rep.gap_ok(), g(rep.gap())),
        "trend": (rep.trend_ok(), f"|{g(rep.gap())}|<=|{g(rep.gap(0))}|+2SE"),
    }, time.perf_counter() - t0, 900.0)


def test_criterion_9_determinism(tmp_path):
    t0 = time.perf_counter()
    cfg = tmp_path / "run.ini"
    cfg.write_text("[params]\nalpha = 0.2\nbeta = 0.8\n\n[run]\nseed = 42\n\n[grid]\nhorizon = 0.05\n"
                   "n_space = 128\nn_steps = 100\nn_scale = 32\nscales = 16, 32\nreplicas = 8\nn_out = 3\n"
                   "n_modes = 32\nn_time = 6\ndegree = 2\nepsilon = 0.1\nball_radius = 0.3\n\n"
                   "[field]\nkind = sine\namplitude = 0.4\nramp = 0.01\n\n"
                   "[checks]\ntolerance = 1\nreference_scale = 16\n")
    scenarios = ["simulate", "hydro", "controlled", "spectral", "rate", "hydro-limit", "entropy", "rare-event"]
    checks = {}
    for sc in scenarios:
        dirs = [tmp_path / f"{sc}-{k}" for k in range(2)]
        codes = [main([sc, "--config", str(cfg), "--out", str(d), "--figures"]) for d in dirs]
        csvs = sorted(p.name for p in dirs[0].glob("*.csv"))
        same = bool(csvs) and all((dirs[0] / c).read_bytes() == (dirs[1] / c).read_bytes() for c in csvs)
        same = same and sorted(p.name for p in dirs[1].glob("*.csv")) == csvs
        checks[sc] = (same and codes[0] == codes[1], f"{len(csvs)}csv/exit{codes[0]}")
    record(9, "byte-identical CSVs on rerun", checks, time.perf_counter() - t0, 600.0)
