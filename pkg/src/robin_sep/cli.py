"""Command-line entry point ``robin-sep <scenario> --config FILE``.

Exit codes: 0 all invariants hold, 2 configuration error, 3 numerical
failure, 4 an asserted invariant failed.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import warnings
from pathlib import Path

import numpy as np

from .config import SCENARIOS, ConfigError, RunConfig, parse_config, parse_overrides

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_INVARIANT = 0, 2, 3, 4
MANIFEST = "manifest.json"


def _jsonable(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"cannot serialize {type(o).__name__}")


class Run:
    """Output directory bookkeeping: files, invariants and the manifest."""

    def __init__(self, cfg: RunConfig, out: Path):
        self.cfg, self.out = cfg, out
        self.files: list[Path] = []
        self.invariants: dict[str, bool] = {}
        self.results: dict = {}
        out.mkdir(parents=True, exist_ok=True)
        self.write_manifest("running")

    def path(self, name: str) -> Path:
        return self.out / name

    def add(self, *paths) -> None:
        for p in paths:
            p = Path(p)
            if p not in self.files:
                self.files.append(p)

    def check(self, name: str, ok) -> None:
        self.invariants[name] = bool(ok)

    def csv(self, name: str, header: str, *columns) -> Path:
        p = self.path(name)
        np.savetxt(p, np.column_stack(columns), delimiter=",", fmt="%.17g", header=header, comments="")
        self.add(p)
        return p

    def json(self, name: str, obj) -> Path:
        p = self.path(name)
        p.write_text(json.dumps(obj, indent=2, sort_keys=True, default=_jsonable) + "\n")
        self.add(p)
        return p

    def write_manifest(self, status: str, failure: dict | None = None) -> None:
        files = {}
        for p in sorted(self.files, key=lambda q: q.name):
            files[p.relative_to(self.out).as_posix()] = hashlib.sha256(p.read_bytes()).hexdigest()
        doc = {"scenario": self.cfg.scenario, "status": status, "config": self.cfg.as_dict(),
               "invariants": self.invariants, "results": self.results, "files": files}
        if failure is not None:
            doc["failure"] = failure
        tmp = self.path(MANIFEST + ".tmp")
        tmp.write_text(json.dumps(doc, indent=2, sort_keys=True, default=_jsonable) + "\n")
        tmp.replace(self.path(MANIFEST))

    def figure(self, name: str, draw) -> None:
        if not self.cfg.get("run", "figures"):
            return
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt

        with matplotlib.rc_context({"svg.hashsalt": "robin-sep", "svg.fonttype": "none"}):
            fig, ax = plt.subplots(figsize=(6, 4))
            draw(ax)
            fig.tight_layout()
            p = self.path(name)
            fig.savefig(p, format="svg", metadata={"Date": None})
            plt.close(fig)
        self.add(p)


def _snapshot_rows(path, n_out: int):
    idx = np.unique(np.round(np.linspace(0, path.times.size - 1, n_out)).astype(int))
    t = np.repeat(path.times[idx], path.x.size)
    x = np.tile(path.x, idx.size)
    return idx, t, x, path.values[idx].ravel()


def _plot_snapshots(path, idx):
    def draw(ax):
        for i in idx:
            ax.plot(path.x, path.values[i], lw=1, label=f"t={path.times[i]:.3g}")
        ax.set_xlabel("x")
        ax.set_ylabel("u(t, x)")
        ax.legend(fontsize=6)
    return draw


def _scenario_simulate(run: Run):
    from .model import LatticeConfiguration, save_configuration, save_jump_path, simulate
    from .model.simulate import empirical_density, sample_profile

    cfg = run.cfg
    g = cfg.values["grid"]
    n, horizon = g["n_scale"], g["horizon"]
    init = sample_profile(cfg.gamma(), n, cfg.seed)
    path = simulate(init, cfg.params, cfg.field(), horizon, seed=cfg.seed + 1)
    run.add(*save_jump_path(path, run.path("events")))
    final = LatticeConfiguration.from_occupancy(path.state_at(horizon))
    run.add(save_configuration(final, run.path("final_configuration.csv")))
    times = np.linspace(0.0, horizon, g["n_out"])
    x = np.linspace(0.0, 1.0, 201)
    dens = np.stack([empirical_density(LatticeConfiguration.from_occupancy(path.state_at(t)), g["epsilon"], x=x) for t in times])
    run.csv("density.csv", "t,x,density", np.repeat(times, x.size), np.tile(x, times.size), dens.ravel())
    occ = final.occupancy
    run.check("occupancy_binary", np.all((occ == 0) | (occ == 1)))
    run.check("times_increasing", np.all(np.diff(path.times) > 0))
    run.check("log_weight_finite", np.isfinite(path.log_weight))
    run.results.update(n_events=len(path), log_weight=path.log_weight, final_particles=final.particle_count())

    def draw(ax):
        for t, d in zip(times, dens):
            ax.plot(x, d, lw=1, label=f"t={t:.3g}")
        ax.set_xlabel("x")
        ax.set_ylabel("smoothed density")
        ax.legend(fontsize=6)
    run.figure("density.svg", draw)


def _pde_path(cfg: RunConfig, controlled: bool):
    from .pde import solve_controlled, solve_hydrodynamic

    g = cfg.values["grid"]
    field = cfg.field()
    if controlled and not field.is_zero:
        return solve_controlled(cfg.gamma(), cfg.params, field, g["horizon"], g["n_space"], g["n_steps"])
    return solve_hydrodynamic(cfg.gamma(), cfg.params, g["horizon"], g["n_space"], g["n_steps"])


def _scenario_pde(run: Run, controlled: bool):
    cfg = run.cfg
    path = _pde_path(cfg, controlled)
    idx, t, x, u = _snapshot_rows(path, cfg.values["grid"]["n_out"])
    run.csv("density.csv", "t,x,u", t, x, u)
    from .pde import mass

    m = mass(path)
    run.csv("mass.csv", "t,mass", path.times, m)
    g0 = path.values[0]
    p = cfg.params
    run.check("finite", np.all(np.isfinite(path.values)))
    if controlled and not cfg.field().is_zero:
        run.check("within_unit_interval", path.within_unit())
    else:
        lo, hi = min(g0.min(), p.alpha), max(g0.max(), p.beta)
        run.check("maximum_principle", path.values.min() >= lo - 1e-12 and path.values.max() <= hi + 1e-12)
    run.results.update(scheme=path.scheme, final_mass=float(m[-1]),
                       final_min=float(path.values[-1].min()), final_max=float(path.values[-1].max()))
    run.figure("density.svg", _plot_snapshots(path, idx))


def _scenario_spectral(run: Run):
    from .quadrature import gauss_legendre_composite
    from .spectral import solve_eigenvalues

    cfg = run.cfg
    k = cfg.values["grid"]["n_modes"]
    basis = solve_eigenvalues(cfg.params, k)
    run.add(basis.to_csv(run.path("eigenvalues.csv")))
    xq, wq = gauss_legendre_composite(512, 16)
    phi = basis.values(xq)
    gram = phi.T @ (wq[:, None] * phi)
    dev = float(np.abs(gram - np.eye(k)).max())
    res = float(np.max(basis.residuals))
    run.check("residuals_below_1e-8", res < 1e-8)
    run.check("gram_within_1e-8", dev < 1e-8)
    run.results.update(max_residual=res, gram_deviation=dev, lambda_1=float(basis.eigenvalues[0]))

    def draw(ax):
        ax.semilogy(np.arange(1, k + 1), np.maximum(basis.residuals, 1e-18), ".")
        ax.set_xlabel("j")
        ax.set_ylabel("residual")
    run.figure("residuals.svg", draw)


def _scenario_rate(run: Run):
    from .rate import rate_decomposed, rate_direct, rate_variational
    from .rate.variational import DEFAULT_SCHEDULE

    cfg = run.cfg
    r = cfg.values["rate"]
    g = cfg.values["grid"]
    path = _pde_path(cfg, True)
    evaluators = [e.strip() for e in r["evaluators"].split(",") if e.strip()]
    values = {}
    for name in evaluators:
        if name == "direct":
            b = rate_direct(path, cfg.params, r["time_smoothing"])
            run.add(*b.save(run.path("rate_direct")))
            values[name] = b.i_total
        elif name == "decomposed":
            b = rate_decomposed(path, cfg.params, r["time_smoothing"])
            run.add(*b.save(run.path("rate_decomposed")))
            values[name] = b.i_total
        else:
            sched = [(nt, d) for nt, d in DEFAULT_SCHEDULE if nt <= g["n_time"] and d <= g["degree"]]
            if (g["n_time"], g["degree"]) not in sched:
                sched.append((g["n_time"], g["degree"]))
            curve = [(nt, d, rate_variational(path, cfg.params, nt, d).value) for nt, d in sched]
            arr = np.array(curve, dtype=float)
            run.csv("variational_curve.csv", "n_time,degree,value", arr[:, 0], arr[:, 1], arr[:, 2])
            values[name] = curve[-1][2]

            def draw(ax, arr=arr):
                ax.plot(np.arange(1, len(arr) + 1), arr[:, 2], "o-")
                ax.set_xlabel("basis level")
                ax.set_ylabel("lower bound")
            run.figure("ascent.svg", draw)
    run.results["rate"] = values
    vals = np.array(list(values.values()))
    run.check("finite", np.all(np.isfinite(vals)))
    if cfg.field().is_zero:
        run.check("zero_on_hydrodynamic_path", np.all(np.abs(vals) <= r["zero_tolerance"]))
    else:
        scale = 1.0 + np.abs(vals).max()
        run.check("nonnegative", np.all(vals >= -r["tolerance"] * scale))
        run.check("evaluators_agree", np.ptp(vals) <= r["tolerance"] * scale)


def _tol(cfg: RunConfig, default: float) -> float:
    t = cfg.values["checks"]["tolerance"]
    return default if t < 0 else t


def _scenario_hydro_limit(run: Run):
    """Untilted protocol for a zero field, tilted protocol otherwise."""
    from .experiments import hydro_limit_check, tilted_hydro_check

    cfg = run.cfg
    g = cfg.values["grid"]
    field = cfg.field()
    common = dict(seed=cfg.seed, jobs=cfg.jobs, tolerance=_tol(cfg, 0.02), n_space=g["n_space"],
                  n_steps=g["n_steps"])
    if field.is_zero:
        rep = hydro_limit_check(cfg.gamma(), cfg.params, g["scales"], g["horizon"], g["replicas"],
                                g["epsilon"], **common)
    else:
        rep = tilted_hydro_check(cfg.gamma(), cfg.params, field, g["scales"], g["horizon"], g["replicas"],
                                 g["epsilon"], **common)
    _convergence_outputs(run, rep)


def _convergence_outputs(run: Run, rep):
    run.add(*rep.save(run.path("convergence")))
    run.check("errors_monotone_up_to_radii", rep.monotone())
    run.check("final_error_within_tolerance", rep.final_ok())
    # the smoothed full configuration bounds every replica average
    run.check("density_bounded", all(0 <= s.max_density <= s.density_bound + 1e-12 for s in rep.scales))
    run.results.update({f"sup_error_{s.n_scale}": s.sup_error for s in rep.scales})

    def draw(ax):
        n = [s.n_scale for s in rep.scales]
        ax.errorbar(n, [s.sup_error for s in rep.scales], yerr=[s.radius for s in rep.scales], fmt="o-")
        ax.set_xscale("log", base=2)
        ax.set_xlabel("N")
        ax.set_ylabel("interior sup-error")
    run.figure("convergence.svg", draw)


def _scenario_entropy(run: Run):
    from .experiments import entropy_identity_check

    cfg = run.cfg
    g, c = cfg.values["grid"], cfg.values["checks"]
    ref = c["reference_scale"] if c["reference_scale"] < g["n_scale"] else None
    rep = entropy_identity_check(cfg.gamma(), cfg.params, cfg.field(), g["n_scale"], g["horizon"],
                                 g["replicas"], ref, seed=cfg.seed, jobs=cfg.jobs, tolerance=_tol(cfg, 0.15),
                                 n_space=g["n_space"], n_steps=g["n_steps"])
    run.add(*rep.save(run.path("entropy")))
    run.check("relative_gap_within_tolerance", rep.gap_ok())
    run.check("finite_size_trend", rep.trend_ok())
    run.results.update(mean=rep.mean, standard_error=rep.standard_error, rate=rep.rate_value, gap=rep.gap())


def _scenario_rare_event(run: Run):
    from .experiments import rare_event_probe
    from .model import TiltField

    cfg = run.cfg
    g = cfg.values["grid"]
    field = cfg.field()
    proposal = field if cfg.values["checks"]["proposal"] == "target" else TiltField.zero()
    rep = rare_event_probe(cfg.gamma(), cfg.params, field, min(g["n_scale"], 64), g["horizon"], g["replicas"],
                           g["ball_radius"], proposal=proposal, seed=cfg.seed, jobs=cfg.jobs,
                           n_space=g["n_space"], n_steps=g["n_steps"])
    run.add(*rep.save(run.path("rare_event")))
    run.results.update(rep.summary())
    run.results.pop("manifest", None)


DISPATCH = {
    "simulate": _scenario_simulate,
    "hydro": lambda run: _scenario_pde(run, False),
    "controlled": lambda run: _scenario_pde(run, True),
    "spectral": _scenario_spectral,
    "rate": _scenario_rate,
    "hydro-limit": _scenario_hydro_limit,
    "entropy": _scenario_entropy,
    "rare-event": _scenario_rare_event,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="robin-sep", description="Exclusion process with weak reservoirs.")
    ap.add_argument("scenario", choices=SCENARIOS)
    ap.add_argument("--config", help="INI configuration file")
    ap.add_argument("--seed", type=int, help="overrides run.seed")
    ap.add_argument("--jobs", type=int, help="maximum worker threads (run.jobs)")
    ap.add_argument("--out", help="output directory (run.output)")
    ap.add_argument("--figures", action="store_true", help="also write SVG figures")
    ap.add_argument("--set", action="append", default=[], metavar="SECTION.KEY=VALUE",
                    help="override any configuration key; repeatable")
    return ap


def _fail(payload: dict, code: int) -> int:
    print(json.dumps(payload, sort_keys=True), file=sys.stderr)
    return code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        over = parse_overrides(args.set)
        for key, val in (("seed", args.seed), ("jobs", args.jobs), ("output", args.out)):
            if val is not None:
                over.append(("run", key, str(val)))
        if args.figures:
            over.append(("run", "figures", "yes"))
        cfg = parse_config(args.scenario, args.config, over)
    except ConfigError as exc:
        return _fail(exc.to_dict(), EXIT_CONFIG)

    from .pde import NumericalFailure
    from .rate import NewtonFailure

    run = Run(cfg, cfg.output_dir())
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            DISPATCH[cfg.scenario](run)
        if caught:
            run.results["warnings"] = sorted({f"{w.category.__name__}: {w.message}" for w in caught})
    except (NumericalFailure, NewtonFailure, FloatingPointError, np.linalg.LinAlgError) as exc:
        failure = {"error": "numeric", "type": type(exc).__name__, "message": str(exc)}
        run.write_manifest("numeric-failure", failure)
        return _fail(failure, EXIT_NUMERIC)
    except ValueError as exc:
        failure = {"error": "config", "type": type(exc).__name__, "message": str(exc)}
        run.write_manifest("config-error", failure)
        return _fail(failure, EXIT_CONFIG)
    except RuntimeError as exc:
        failure = {"error": "numeric", "type": type(exc).__name__, "message": str(exc)}
        run.write_manifest("numeric-failure", failure)
        return _fail(failure, EXIT_NUMERIC)
    failed = sorted(k for k, ok in run.invariants.items() if not ok)
    if failed:
        failure = {"error": "invariant", "failed": failed}
        run.write_manifest("fail", failure)
        return _fail(failure, EXIT_INVARIANT)
    run.write_manifest("pass")
    print(json.dumps({"scenario": cfg.scenario, "status": "pass", "output": str(run.out)}, sort_keys=True))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
