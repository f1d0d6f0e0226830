"""CSV and JSON serialization of microscopic objects."""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from ..params import ReservoirParams
from .types import KIND_NAMES, EmpiricalMeasure, JumpPath, LatticeConfiguration


def save_jump_path(path: JumpPath, stem) -> tuple[Path, Path]:
    """Write ``stem.csv`` (time, kind, site) and ``stem.json`` (manifest)."""
    stem = Path(stem)
    cs, js = stem.with_suffix(".csv"), stem.with_suffix(".json")
    with cs.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["time", "kind", "site"])
        for t, k, s in zip(path.times, path.kinds, path.sites):
            w.writerow(["%.17g" % t, KIND_NAMES[k], int(s)])
    manifest = {
        "seed": int(path.rng_seed),
        "params": path.params.to_dict() if path.params is not None else None,
        "field_id": path.field_id,
        "log_weight": float(path.log_weight),
        "start_time": float(path.start_time),
        "end_time": float(path.end_time),
        "n_scale": int(path.n_scale),
        "initial_occupancy": "".join(map(str, path.initial_config.occupancy.tolist())),
        "n_events": len(path),
    }
    js.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return cs, js


def load_jump_path(stem) -> JumpPath:
    stem = Path(stem)
    man = json.loads(stem.with_suffix(".json").read_text())
    times, kinds, sites = [], [], []
    with stem.with_suffix(".csv").open(newline="") as fh:
        for row in csv.DictReader(fh):
            times.append(float(row["time"]))
            kinds.append(KIND_NAMES.index(row["kind"]))
            sites.append(int(row["site"]))
    occ = np.array([int(c) for c in man["initial_occupancy"]], dtype=np.uint8)
    return JumpPath(
        LatticeConfiguration.from_occupancy(occ, man["n_scale"]),
        np.array(times), np.array(kinds, dtype=np.int8), np.array(sites, dtype=np.int32),
        man["end_time"], log_weight=man["log_weight"], rng_seed=man["seed"],
        start_time=man["start_time"],
        params=ReservoirParams(**man["params"]) if man["params"] else None,
        field_id=man["field_id"],
    )


def save_configuration(config: LatticeConfiguration, path) -> Path:
    """Write ``site, occupancy`` rows for ``k = 1..N-1``."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["site", "occupancy"])
        for k, e in enumerate(config.occupancy, 1):
            w.writerow([k, int(e)])
    return path


def save_measure(measure: EmpiricalMeasure, path) -> Path:
    occ = np.zeros(measure.n_scale - 1, np.uint8)
    occ[np.rint(measure.positions * measure.n_scale).astype(int) - 1] = 1
    return save_configuration(LatticeConfiguration.from_occupancy(occ), path)


def load_configuration(path) -> LatticeConfiguration:
    with Path(path).open(newline="") as fh:
        rows = [(int(r["site"]), int(r["occupancy"])) for r in csv.DictReader(fh)]
    rows.sort()
    return LatticeConfiguration.from_occupancy(np.array([e for _, e in rows], dtype=np.uint8))
