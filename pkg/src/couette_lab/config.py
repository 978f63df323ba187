"""TOML configuration: schema, validation and conversion to run objects.

Sections (all optional)::

    seed = 0
    [grid]    Kmax, Nv, Lv, dealias_fraction
    [run]     nu, amplitude, beta_amp, preset, t_end, dt, record_every, sigma, s, beta,
              ceiling, nonlinear, track_coordinates, rtol
    [linear]  nus, t_end, n_times, slope_window
    [toy]     nu, eta, beta, m, kappa, n_steps, etas
    [sweep]   nus, amp_lo, amp_hi, rtol, max_iter, workers, stub
    [lemmas]  names, budget
"""
from __future__ import annotations

import math
import re
import sys

from .errors import ConfigError
from .solver import SimConfig
from .spectral import Grid

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

SCHEMA: dict[str, dict[str, type | tuple]] = {
    "grid": {"Kmax": int, "Nv": int, "Lv": float, "dealias_fraction": float},
    "run": {"nu": float, "amplitude": float, "beta_amp": float, "preset": str, "t_end": float,
            "dt": (float, str), "record_every": int, "sigma": float, "s": float, "beta": float,
            "ceiling": float, "nonlinear": bool, "track_coordinates": bool, "rtol": float},
    "linear": {"nus": list, "t_end": float, "n_times": int, "slope_window": list},
    "toy": {"nu": float, "eta": float, "beta": float, "m": int, "kappa": float, "n_steps": int, "etas": list},
    "sweep": {"nus": list, "amp_lo": float, "amp_hi": float, "rtol": float, "max_iter": int,
              "workers": int, "stub": bool},
    "lemmas": {"names": list, "budget": int},
}
TOP_LEVEL = {"seed": int}

DEFAULT_GRID = {"Kmax": 16, "Nv": 64, "Lv": 32 * math.pi, "dealias_fraction": 2.0 / 3.0}


def _line_of(text: str, section: str | None, key: str | None) -> int | None:
    """Line of ``key`` inside ``section``; ``key=None`` finds the section header."""
    current = None
    for no, line in enumerate(text.splitlines(), 1):
        s = line.strip()
        m = re.match(r"^\[\s*([^\]]+?)\s*\]", s)
        if m:
            current = m.group(1)
            if key is None and current == section:
                return no
            continue
        if key is None:
            continue
        if current == section and re.match(rf"^{re.escape(key)}\s*=", s):
            return no
    return None


def _fail(text, section, key, msg):
    line = _line_of(text, section, key)
    where = f"line {line}: " if line else ""
    raise ConfigError(f"{where}{msg}")


def _type_ok(value, expected) -> bool:
    exp = expected if isinstance(expected, tuple) else (expected,)
    for e in exp:
        if e is float and isinstance(value, (int, float)) and not isinstance(value, bool):
            return True
        if e is int and isinstance(value, int) and not isinstance(value, bool):
            return True
        if e not in (int, float) and isinstance(value, e):
            return True
    return False


def parse_config(text: str) -> dict:
    """Parse and type-check a configuration; raise ConfigError with the offending line."""
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"malformed config: {exc}") from None
    for key, value in doc.items():
        if isinstance(value, dict):
            if key not in SCHEMA:
                _fail(text, key, None, f"unknown section [{key}]")
            for k, v in value.items():
                if k not in SCHEMA[key]:
                    _fail(text, key, k, f"unknown key {k!r} in [{key}]")
                if not _type_ok(v, SCHEMA[key][k]):
                    _fail(text, key, k, f"[{key}].{k} has the wrong type ({type(v).__name__})")
        elif key in TOP_LEVEL:
            if not _type_ok(value, TOP_LEVEL[key]):
                _fail(text, None, key, f"{key} has the wrong type ({type(value).__name__})")
        else:
            _fail(text, None, key, f"unknown key {key!r}")
    doc["_text"] = text
    return doc


def load_config(path: str | None) -> dict:
    if path is None:
        return parse_config("")
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return parse_config(text)


def section(doc: dict, name: str) -> dict:
    return dict(doc.get(name, {}))


def grid_from(doc: dict) -> Grid:
    g = {**DEFAULT_GRID, **section(doc, "grid")}
    try:
        return Grid(int(g["Kmax"]), int(g["Nv"]), float(g["Lv"]), float(g["dealias_fraction"]))
    except ValueError as exc:
        _fail(doc.get("_text", ""), "grid", next(iter(section(doc, "grid")), "Kmax"), f"invalid grid: {exc}")


def sim_config_from(doc: dict, seed: int | None = None, **overrides) -> SimConfig:
    r = section(doc, "run")
    r.update({k: v for k, v in overrides.items() if v is not None})
    kw = {
        "grid": grid_from(doc),
        "nu": float(r.get("nu", 1e-2)),
        "amplitude": float(r.get("amplitude", 0.05)),
        "seed": int(seed if seed is not None else doc.get("seed", 0)),
    }
    rename = {"preset": "initial_preset"}
    for key in ("beta_amp", "preset", "t_end", "dt", "record_every", "sigma", "s", "beta", "ceiling",
                "nonlinear", "track_coordinates", "rtol"):
        if key in r:
            kw[rename.get(key, key)] = r[key]
    try:
        return SimConfig(**kw)
    except ValueError as exc:
        raise ConfigError(f"invalid [run] section: {exc}") from None
