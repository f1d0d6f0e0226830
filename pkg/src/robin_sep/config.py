"""INI run configuration with strict validation.

Sections and keys are fixed; anything unknown is rejected. Values given on
the command line as ``section.key=value`` override the file.
"""

from __future__ import annotations

import configparser
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

import numpy as np

from .model.field import TiltField
from .params import ReservoirParams

SCENARIOS = ("simulate", "hydro", "controlled", "spectral", "rate", "hydro-limit", "entropy", "rare-event")


class ConfigError(ValueError):
    """Invalid configuration; ``line`` and ``column`` locate it in the file when known."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None, key: str | None = None):
        self.line, self.column, self.key = line, column, key
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(message + where)

    def to_dict(self) -> dict:
        return {"error": "config", "message": str(self), "line": self.line, "column": self.column, "key": self.key}


def _int_list(s: str) -> list[int]:
    return [int(v) for v in s.replace(";", ",").split(",") if v.strip()]


def _bool(s: str) -> bool:
    v = s.strip().lower()
    if v in ("1", "yes", "true", "on"):
        return True
    if v in ("0", "no", "false", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _opt_float(s: str) -> float | None:
    return None if s.strip().lower() in ("", "none") else float(s)


# section -> key -> (parser, default); a default of ... means required
SCHEMA: dict[str, dict[str, tuple[Callable[[str], Any], Any]]] = {
    "params": {"alpha": (float, ...), "beta": (float, ...), "cap_a": (float, 1.0), "cap_b": (float, 1.0)},
    "run": {"seed": (int, 0), "jobs": (int, 1), "output": (str, ""), "figures": (_bool, False)},
    "grid": {
        "horizon": (float, 0.1), "n_space": (int, 512), "n_steps": (int, 2048), "n_modes": (int, 128),
        "n_out": (int, 11), "n_scale": (int, 64), "scales": (_int_list, [64, 128, 256]),
        "replicas": (int, 200), "epsilon": (float, 0.05), "n_time": (int, 21), "degree": (int, 10),
        "ball_radius": (float, 0.1),
    },
    "initial": {"kind": (str, "stationary"), "value": (float, 0.5), "position": (float, 0.5),
                "low": (float, 0.0), "high": (float, 1.0), "file": (str, "")},
    "field": {"kind": (str, "zero"), "slope": (float, 1.0), "offset": (float, 0.0), "amplitude": (float, 0.4),
              "mode": (int, 1), "ramp": (_opt_float, None), "file": (str, "")},
    "rate": {"evaluators": (str, "direct"), "time_smoothing": (float, 0.0), "tolerance": (float, 1e-3),
             "zero_tolerance": (float, 1e-8)},
    "checks": {"tolerance": (float, -1.0), "reference_scale": (int, 128), "proposal": (str, "target")},
}

BOUNDS = {
    ("run", "jobs"): (1, 256), ("grid", "n_space"): (16, 1 << 16), ("grid", "n_steps"): (1, 1 << 22),
    ("grid", "n_modes"): (1, 4096), ("grid", "n_out"): (2, 10001), ("grid", "n_scale"): (3, 1 << 16),
    ("grid", "replicas"): (2, 1 << 20), ("grid", "n_time"): (2, 401), ("grid", "degree"): (0, 40),
    ("field", "mode"): (1, 1000),
}


@dataclass(frozen=True)
class RunConfig:
    """Validated configuration of one CLI run."""

    scenario: str
    params: ReservoirParams
    values: dict = field(repr=False)
    source: str | None = None

    def get(self, section: str, key: str):
        return self.values[section][key]

    @property
    def seed(self) -> int:
        return self.values["run"]["seed"]

    @property
    def jobs(self) -> int:
        return self.values["run"]["jobs"]

    def output_dir(self) -> Path:
        out = self.values["run"]["output"]
        if out:
            return Path(out)
        root = os.environ.get("ROBIN_SEP_OUT", "robin-sep-out")
        return Path(root) / self.scenario

    def field(self) -> TiltField:
        f = self.values["field"]
        kind = f["kind"]
        if kind == "zero":
            return TiltField.zero()
        if kind == "affine":
            return TiltField.affine(f["slope"], f["offset"])
        if kind == "sine":
            return TiltField.sine(f["amplitude"], f["mode"], f["ramp"])
        return TiltField.from_csv(f["file"])

    def gamma(self) -> Callable:
        g = self.values["initial"]
        kind = g["kind"]
        if kind == "stationary":
            return self.params.stationary_profile
        if kind == "constant":
            v = g["value"]
            return lambda x: np.full(np.shape(x), v)
        if kind == "step":
            pos, lo, hi = g["position"], g["low"], g["high"]
            return lambda x: np.where(np.asarray(x) < pos, hi, lo)
        data = np.loadtxt(g["file"], delimiter=",", skiprows=1, ndmin=2)
        xs, ys = data[:, 0], data[:, 1]
        return lambda x: np.interp(x, xs, ys)

    def as_dict(self) -> dict:
        return {"scenario": self.scenario, "source": self.source,
                **{s: {k: v for k, v in kv.items()} for s, kv in self.values.items()}}


def _locate(text: str, section: str, key: str | None) -> tuple[int | None, int | None]:
    current = None
    for i, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1].strip()
            if key is None and current == section:
                return i, raw.index("[") + 1
            continue
        if current == section and key is not None:
            for sep in ("=", ":"):
                if sep in line and line.split(sep, 1)[0].strip().lower() == key:
                    return i, raw.index(sep) + 2
    return None, None


def parse_overrides(items) -> list[tuple[str, str, str]]:
    out = []
    for item in items or []:
        if "=" not in item or "." not in item.split("=", 1)[0]:
            raise ConfigError(f"override {item!r} must look like section.key=value", key=item)
        lhs, value = item.split("=", 1)
        section, key = lhs.split(".", 1)
        out.append((section.strip(), key.strip().lower(), value.strip()))
    return out


def parse_config(scenario: str, path=None, overrides=()) -> RunConfig:
    """Read, merge and validate a configuration.

    Parameters
    ----------
    scenario : str
        One of :data:`SCENARIOS`.
    path : path-like, optional
        INI file. Without a file every required key must come from ``overrides``.
    overrides : iterable of (section, key, value)
        Command-line values, applied after the file.

    Raises
    ------
    ConfigError
        On syntax errors, unknown sections or keys, bad values and violated
        constraints. The message names the offending key.
    """
    if scenario not in SCENARIOS:
        raise ConfigError(f"unknown scenario {scenario!r}; choose from {', '.join(SCENARIOS)}", key="scenario")
    cp = configparser.ConfigParser(interpolation=None, default_section="__none__")
    text = ""
    if path is not None:
        p = Path(path)
        if not p.is_file():
            raise ConfigError(f"config file {str(p)!r} does not exist", key="config")
        text = p.read_text()
        try:
            cp.read_string(text, source=str(p))
        except configparser.ParsingError as exc:
            line = exc.errors[0][0]
            bad = text.splitlines()[line - 1].strip() if 0 < line <= len(text.splitlines()) else ""
            raise ConfigError(f"cannot parse {bad!r}, expected key = value", line=line, column=1) from None
        except configparser.DuplicateOptionError as exc:
            raise ConfigError(f"duplicate key {exc.option!r} in [{exc.section}]", line=exc.lineno, column=1,
                              key=f"{exc.section}.{exc.option}") from None
        except configparser.DuplicateSectionError as exc:
            raise ConfigError(f"duplicate section [{exc.section}]", line=exc.lineno, column=1,
                              key=exc.section) from None
        except configparser.MissingSectionHeaderError as exc:
            raise ConfigError("key outside of any section", line=exc.lineno, column=1) from None
    raw: dict[str, dict[str, tuple[str, tuple]]] = {}
    for section in cp.sections():
        if section not in SCHEMA:
            line, col = _locate(text, section, None)
            raise ConfigError(f"unknown section [{section}]", line, col, key=section)
        for key, value in cp.items(section):
            if key not in SCHEMA[section]:
                line, col = _locate(text, section, key)
                raise ConfigError(f"unknown key {key!r} in [{section}]", line, col, key=f"{section}.{key}")
            raw.setdefault(section, {})[key] = (value, _locate(text, section, key))
    for section, key, value in overrides:
        if section not in SCHEMA or key not in SCHEMA[section]:
            raise ConfigError(f"unknown override {section}.{key}", key=f"{section}.{key}")
        raw.setdefault(section, {})[key] = (value, (None, None))

    values: dict[str, dict[str, Any]] = {}
    for section, keys in SCHEMA.items():
        values[section] = {}
        for key, (conv, default) in keys.items():
            if key in raw.get(section, {}):
                text_value, (line, col) = raw[section][key]
                try:
                    values[section][key] = conv(text_value)
                except ValueError as exc:
                    raise ConfigError(f"{section}.{key}: {exc}", line, col, key=f"{section}.{key}") from None
            elif default is ...:
                raise ConfigError(f"missing required key {key!r} in [{section}]", key=f"{section}.{key}")
            else:
                values[section][key] = default
    _validate(values)
    try:
        params = ReservoirParams(**values["params"])
    except ValueError as exc:
        msg = str(exc)
        key = msg.split()[0]
        if "alpha <= beta" in msg:
            msg = f"constraint alpha <= beta violated: {msg}"
            key = "alpha <= beta"
        raise ConfigError(msg, key=key) from None
    return RunConfig(scenario, params, values, None if path is None else str(path))


def _validate(values: dict) -> None:
    for (section, key), (lo, hi) in BOUNDS.items():
        v = values[section][key]
        if not lo <= v <= hi:
            raise ConfigError(f"{section}.{key}={v} outside [{lo}, {hi}]", key=f"{section}.{key}")
    g = values["grid"]
    for key in ("horizon",):
        if not g[key] > 0:
            raise ConfigError(f"grid.{key} must be positive", key=f"grid.{key}")
    if not 0 < g["epsilon"] < 0.5:
        raise ConfigError("grid.epsilon must lie in (0, 0.5)", key="grid.epsilon")
    if not g["ball_radius"] > 0:
        raise ConfigError("grid.ball_radius must be positive", key="grid.ball_radius")
    sc = g["scales"]
    if not sc or any(n < 3 for n in sc) or any(b <= a for a, b in zip(sc, sc[1:])):
        raise ConfigError("grid.scales must be strictly increasing lattice sizes >= 3", key="grid.scales")
    ini = values["initial"]
    if ini["kind"] not in ("stationary", "constant", "step", "file"):
        raise ConfigError(f"initial.kind {ini['kind']!r} not one of stationary, constant, step, file",
                          key="initial.kind")
    for key in ("value", "low", "high"):
        if not 0.0 <= ini[key] <= 1.0:
            raise ConfigError(f"initial.{key} must lie in [0, 1]", key=f"initial.{key}")
    fld = values["field"]
    if fld["kind"] not in ("zero", "affine", "sine", "tabulated"):
        raise ConfigError(f"field.kind {fld['kind']!r} not one of zero, affine, sine, tabulated", key="field.kind")
    if fld["ramp"] is not None and fld["ramp"] <= 0:
        raise ConfigError("field.ramp must be positive", key="field.ramp")
    for section, kind in (("initial", "file"), ("field", "tabulated")):
        if values[section]["kind"] == kind:
            f = values[section]["file"]
            if not f or not Path(f).is_file():
                raise ConfigError(f"{section}.file {f!r} does not exist", key=f"{section}.file")
    ev = [e.strip() for e in values["rate"]["evaluators"].split(",") if e.strip()]
    bad = [e for e in ev if e not in ("direct", "decomposed", "variational")]
    if not ev or bad:
        raise ConfigError(f"rate.evaluators has unknown entries {bad}", key="rate.evaluators")
    if values["checks"]["proposal"] not in ("target", "zero"):
        raise ConfigError("checks.proposal must be target or zero", key="checks.proposal")
