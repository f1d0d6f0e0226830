"""Report containers for the Monte Carlo checks, with JSON and CSV output."""

from __future__ import annotations

import json
import math
import platform
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..params import ReservoirParams


def provenance(kind: str, params: ReservoirParams, field=None, **extra) -> dict:
    """Everything needed to rerun a check bit-identically."""
    import numba
    import scipy

    out = {
        "kind": kind,
        "params": params.to_dict(),
        "field": None if field is None else {"name": field.name, **field.spec},
        "rng": "Philox per replica, keys from SeedSequence(seed).spawn",
        "versions": {"python": platform.python_version(), "numpy": np.__version__,
                     "scipy": scipy.__version__, "numba": numba.__version__},
    }
    out.update(extra)
    return out


def _json(obj, path: Path) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True, default=float) + "\n")


@dataclass
class ScaleResult:
    n_scale: int
    replicas: int
    checkpoints: list
    sup_error: float
    l2_error: list
    se_max: float
    radius: float
    max_density: float
    density_bound: float
    mean_events: float


@dataclass
class ConvergenceReport:
    """Errors of replica-averaged smoothed densities, one entry per lattice size.

    Attributes
    ----------
    tolerance : float
        Calibrated bound on the sup-error at the largest scale, applied on top
        of ``sigma_k`` standard errors.
    profiles : dict
        ``N -> (mean, reference)`` arrays of shape ``(3, len(window))``.
    """

    kind: str
    scales: list
    tolerance: float
    sigma_k: float
    window: np.ndarray
    profiles: dict
    manifest: dict

    def monotone(self) -> bool:
        """Errors do not increase across scales beyond the combined radii."""
        s = self.scales
        return all(b.sup_error <= a.sup_error + self.sigma_k * math.hypot(a.se_max, b.se_max)
                   for a, b in zip(s, s[1:]))

    def final_ok(self) -> bool:
        last = self.scales[-1]
        return last.sup_error <= self.tolerance + last.radius

    def passed(self) -> bool:
        return self.monotone() and self.final_ok()

    def summary(self) -> dict:
        return {"kind": self.kind, "tolerance": self.tolerance, "sigma_k": self.sigma_k,
                "monotone": self.monotone(), "final_ok": self.final_ok(), "passed": self.passed(),
                "scales": [vars(s) for s in self.scales], "manifest": self.manifest}

    def rows(self):
        for s in self.scales:
            yield (s.n_scale, s.replicas, s.sup_error, *s.l2_error, s.se_max, s.radius)

    def save(self, stem) -> list[Path]:
        stem = Path(stem)
        _json(self.summary(), stem.with_suffix(".json"))
        csv = stem.with_suffix(".csv")
        np.savetxt(csv, np.array(list(self.rows()), dtype=float), delimiter=",", fmt="%.17g", comments="",
                   header="n_scale,replicas,sup_error,l2_t1,l2_t2,l2_t3,se_max,radius")
        prof = stem.with_name(stem.name + "_profiles.csv")
        blocks = []
        for n, (mean, ref) in self.profiles.items():
            for i in range(mean.shape[0]):
                blocks.append(np.column_stack([np.full(self.window.size, n), np.full(self.window.size, i),
                                               self.window, mean[i], ref[i]]))
        np.savetxt(prof, np.vstack(blocks), delimiter=",", fmt="%.17g", comments="",
                   header="n_scale,checkpoint,x,particles,pde")
        return [stem.with_suffix(".json"), csv, prof]


@dataclass
class EntropyReport:
    """Mean of ``(1/N) log dP^H/dP`` under the tilted law for one or two scales.

    ``rows`` holds ``(N, mean, standard_error)``, smallest scale first.
    """

    rows: list
    rate_value: float
    tolerance: float
    manifest: dict

    @property
    def n_scale(self) -> int:
        return self.rows[-1][0]

    @property
    def mean(self) -> float:
        return self.rows[-1][1]

    @property
    def standard_error(self) -> float:
        return self.rows[-1][2]

    def gap(self, i: int = -1) -> float:
        """Relative gap ``(mean - I) / I``; absolute gap when ``I == 0``."""
        m = self.rows[i][1]
        return m - self.rate_value if self.rate_value == 0 else (m - self.rate_value) / self.rate_value

    def gap_ok(self) -> bool:
        return abs(self.gap()) <= self.tolerance

    def trend_ok(self, k: float = 2.0) -> bool:
        if len(self.rows) < 2:
            return True
        (_, _, s0), (_, _, s1) = self.rows[0], self.rows[-1]
        scale = abs(self.rate_value) if self.rate_value else 1.0
        return abs(self.gap()) <= abs(self.gap(0)) + k * math.hypot(s0, s1) / scale

    def passed(self) -> bool:
        return self.gap_ok() and self.trend_ok()

    def summary(self) -> dict:
        return {"rows": [{"n_scale": n, "mean": m, "standard_error": s, "relative_gap": self.gap(i)}
                         for i, (n, m, s) in enumerate(self.rows)],
                "rate_value": self.rate_value, "tolerance": self.tolerance, "gap_ok": self.gap_ok(),
                "trend_ok": self.trend_ok(), "passed": self.passed(), "manifest": self.manifest}

    def save(self, stem) -> list[Path]:
        stem = Path(stem)
        _json(self.summary(), stem.with_suffix(".json"))
        csv = stem.with_suffix(".csv")
        data = np.array([(n, m, s, self.rate_value, self.gap(i)) for i, (n, m, s) in enumerate(self.rows)])
        np.savetxt(csv, data, delimiter=",", fmt="%.17g", comments="",
                   header="n_scale,mean_log_weight,standard_error,rate,relative_gap")
        return [stem.with_suffix(".json"), csv]


@dataclass
class RareEventReport:
    """Importance-sampling estimate of a tube probability; exploratory only."""

    n_scale: int
    replicas: int
    hits: int
    log_estimate: float
    ess: float
    rate_value: float
    distances: np.ndarray = field(repr=False)
    manifest: dict = field(default_factory=dict)
    min_ess: float = 10.0

    @property
    def degenerate(self) -> bool:
        return self.ess < self.min_ess

    @property
    def cost(self) -> float:
        """``-(1/N) log`` of the estimate."""
        return -self.log_estimate / self.n_scale

    def summary(self) -> dict:
        return {"n_scale": self.n_scale, "replicas": self.replicas, "hits": self.hits,
                "log_estimate": self.log_estimate, "cost": self.cost, "rate": self.rate_value,
                "ess": self.ess, "degenerate": self.degenerate, "manifest": self.manifest}

    def save(self, stem) -> list[Path]:
        stem = Path(stem)
        _json(self.summary(), stem.with_suffix(".json"))
        csv = stem.with_suffix(".csv")
        np.savetxt(csv, np.column_stack([np.arange(self.distances.size), self.distances]), delimiter=",",
                   fmt="%.17g", comments="", header="replica,distance")
        return [stem.with_suffix(".json"), csv]
