"""Result containers for rate evaluations."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


@dataclass(frozen=True)
class BoundaryDecomposition:
    """Per-time ingredients of the bulk/boundary split.

    Attributes
    ----------
    xi : ndarray, shape (L + 1, M + 1)
        Normalized running integral of ``1 / sigma(u_t)``.
    zeta : ndarray
        ``1 / <1 / sigma(u_t)>``.
    a_t, b_t : ndarray
        Boundary charges at the left and right end.
    m_field : ndarray, shape (L + 1, M + 1)
        Centered antiderivative of ``-du/dt`` with zero ``1/sigma`` average.
    r_t : ndarray
        Log-odds correction of the bulk term.
    """

    xi: np.ndarray
    zeta: np.ndarray
    a_t: np.ndarray
    b_t: np.ndarray
    m_field: np.ndarray
    r_t: np.ndarray
    legendre_points: np.ndarray | None = None


@dataclass(frozen=True)
class RateBreakdown:
    """Value of the rate functional with its parts.

    ``split`` tells how ``i_bulk`` and ``i_boundary`` were obtained:
    ``"field"`` means ``int sigma (H')^2`` and the boundary ``c`` costs of the
    optimal field; ``"decomposition"`` means the interior and boundary
    variational problems.
    """

    i_total: float
    i_bulk: float
    i_boundary: float
    times: np.ndarray
    bulk_integrand: np.ndarray
    boundary_integrand: np.ndarray
    energy: float
    strong_energy: float
    split: str = "field"
    in_domain: bool = True
    field_grad: np.ndarray | None = field(default=None, repr=False)
    field_left: np.ndarray | None = field(default=None, repr=False)
    field_right: np.ndarray | None = field(default=None, repr=False)
    decomposition: BoundaryDecomposition | None = field(default=None, repr=False)
    diagnostics: dict = field(default_factory=dict)

    def summary(self) -> dict:
        return {
            "i_total": self.i_total,
            "i_bulk": self.i_bulk,
            "i_boundary": self.i_boundary,
            "energy": self.energy,
            "strong_energy": self.strong_energy,
            "split": self.split,
            "in_domain": self.in_domain,
            "diagnostics": self.diagnostics,
        }

    def save(self, stem) -> tuple[Path, Path]:
        """Write ``stem.json`` with the totals and ``stem.csv`` with per-time integrands."""
        stem = Path(stem)
        js = stem.with_suffix(".json")
        cs = stem.with_suffix(".csv")
        js.write_text(json.dumps(self.summary(), indent=2, sort_keys=True, default=float) + "\n")
        with cs.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t", "bulk", "boundary"])
            for row in zip(self.times, self.bulk_integrand, self.boundary_integrand):
                w.writerow(["%.17g" % v for v in row])
        return js, cs
