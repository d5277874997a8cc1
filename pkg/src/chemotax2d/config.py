"""Strict TOML scenario configuration.

Every key listed in the grammar is required, unknown keys are rejected, and
errors name the offending key: a silent typo in a PDE parameter is the
costliest failure mode this tool has.  The grammar (see README for a full
example):

  [grid]          nx, ny, lx, ly
  [model]         tau, r, mu, p
  [controls]      dt, dt_mode, cfl_safety, t_end, pos_tol, clamp_negatives
  [energy]        c_gn
  [initial_data.u0]  generator + generator parameters
  [initial_data.w0]  generator + generator parameters
  [initial_data.v0]  (only when tau = 1, optional)
  [initial_data.z0]  (only when tau = 1, optional)
  [output]        directory, cadence, snapshot_times
  seed            top-level integer
"""

from __future__ import annotations

import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .grid import GridSpec
from .model import ModelParams


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class OutputConfig:
    directory: str
    cadence: int
    snapshot_times: tuple[float, ...]


@dataclass(frozen=True)
class ControlConfig:
    dt: float
    dt_mode: str
    cfl_safety: float
    t_end: float
    pos_tol: float
    clamp_negatives: bool


@dataclass(frozen=True)
class ScenarioConfig:
    grid: GridSpec
    model: ModelParams
    controls: ControlConfig
    c_gn: float
    initial_data: dict[str, dict[str, Any]]
    output: OutputConfig
    seed: int


def _section(raw: Mapping[str, Any], name: str) -> Mapping[str, Any]:
    if name not in raw:
        raise ConfigError(f"missing section [{name}]")
    sec = raw[name]
    if not isinstance(sec, Mapping):
        raise ConfigError(f"[{name}] must be a section (table)")
    return sec


def _take(sec: Mapping[str, Any], section: str, key: str, kind: type):
    if key not in sec:
        raise ConfigError(f"missing key '{key}' in section [{section}]")
    val = sec[key]
    if kind is float:
        if isinstance(val, bool) or not isinstance(val, (int, float)):
            raise ConfigError(f"key '{section}.{key}' must be a number, got {val!r}")
        return float(val)
    if kind is int:
        if isinstance(val, bool) or not isinstance(val, int):
            raise ConfigError(f"key '{section}.{key}' must be an integer, got {val!r}")
        return int(val)
    if kind is bool:
        if not isinstance(val, bool):
            raise ConfigError(f"key '{section}.{key}' must be a boolean, got {val!r}")
        return val
    if kind is str:
        if not isinstance(val, str):
            raise ConfigError(f"key '{section}.{key}' must be a string, got {val!r}")
        return val
    raise AssertionError(kind)


def _reject_unknown(sec: Mapping[str, Any], section: str, allowed: set):
    unknown = set(sec) - allowed
    if unknown:
        raise ConfigError(f"unknown key(s) {sorted(unknown)} in section [{section}]")


def parse_config_data(raw: Mapping[str, Any]) -> ScenarioConfig:
    _reject_unknown(
        raw, "top level", {"grid", "model", "controls", "energy", "initial_data", "output", "seed"}
    )
    if "seed" not in raw:
        raise ConfigError("missing top-level key 'seed'")
    if isinstance(raw["seed"], bool) or not isinstance(raw["seed"], int):
        raise ConfigError(f"key 'seed' must be an integer, got {raw['seed']!r}")

    gsec = _section(raw, "grid")
    _reject_unknown(gsec, "grid", {"nx", "ny", "lx", "ly"})
    try:
        grid = GridSpec(
            nx=_take(gsec, "grid", "nx", int),
            ny=_take(gsec, "grid", "ny", int),
            lx=_take(gsec, "grid", "lx", float),
            ly=_take(gsec, "grid", "ly", float),
        )
    except ValueError as exc:
        raise ConfigError(f"invalid [grid]: {exc}") from exc

    msec = _section(raw, "model")
    _reject_unknown(msec, "model", {"tau", "r", "mu", "p"})
    try:
        model = ModelParams(
            tau=_take(msec, "model", "tau", int),
            r=_take(msec, "model", "r", float),
            mu=_take(msec, "model", "mu", float),
            p=_take(msec, "model", "p", float),
        )
    except ValueError as exc:
        raise ConfigError(f"invalid [model]: {exc}") from exc

    csec = _section(raw, "controls")
    _reject_unknown(
        csec, "controls", {"dt", "dt_mode", "cfl_safety", "t_end", "pos_tol", "clamp_negatives"}
    )
    dt_mode = _take(csec, "controls", "dt_mode", str)
    if dt_mode not in ("fixed", "adaptive"):
        raise ConfigError(f"key 'controls.dt_mode' must be 'fixed' or 'adaptive', got {dt_mode!r}")
    controls = ControlConfig(
        dt=_take(csec, "controls", "dt", float),
        dt_mode=dt_mode,
        cfl_safety=_take(csec, "controls", "cfl_safety", float),
        t_end=_take(csec, "controls", "t_end", float),
        pos_tol=_take(csec, "controls", "pos_tol", float),
        clamp_negatives=_take(csec, "controls", "clamp_negatives", bool),
    )
    if controls.dt <= 0.0:
        raise ConfigError("key 'controls.dt' must be > 0")
    if controls.t_end < 0.0:
        raise ConfigError("key 'controls.t_end' must be >= 0")

    esec = _section(raw, "energy")
    _reject_unknown(esec, "energy", {"c_gn"})
    c_gn = _take(esec, "energy", "c_gn", float)
    if c_gn <= 0.0:
        raise ConfigError("key 'energy.c_gn' must be > 0")

    isec = _section(raw, "initial_data")
    allowed_fields = {"u0", "w0"} | ({"v0", "z0"} if model.tau == 1 else set())
    unknown = set(isec) - allowed_fields
    if unknown:
        extra = " (v0/z0 are only accepted when tau = 1)" if model.tau == 0 else ""
        raise ConfigError(f"unknown initial_data entries {sorted(unknown)}{extra}")
    for req in ("u0", "w0"):
        if req not in isec:
            raise ConfigError(f"missing section [initial_data.{req}]")
    initial_data: dict[str, dict[str, Any]] = {}
    for name, entry in isec.items():
        if not isinstance(entry, Mapping) or "generator" not in entry:
            raise ConfigError(f"[initial_data.{name}] must be a table with a 'generator' key")
        initial_data[name] = dict(entry)

    osec = _section(raw, "output")
    _reject_unknown(osec, "output", {"directory", "cadence", "snapshot_times"})
    directory = _take(osec, "output", "directory", str)
    cadence = _take(osec, "output", "cadence", int)
    if cadence < 1:
        raise ConfigError("key 'output.cadence' must be >= 1")
    times = osec.get("snapshot_times")
    if not isinstance(times, list) or any(
        isinstance(t, bool) or not isinstance(t, (int, float)) for t in times
    ):
        raise ConfigError("key 'output.snapshot_times' must be a list of numbers")
    snapshot_times = tuple(float(t) for t in times)

    return ScenarioConfig(
        grid=grid,
        model=model,
        controls=controls,
        c_gn=c_gn,
        initial_data=initial_data,
        output=OutputConfig(directory, cadence, snapshot_times),
        seed=raw["seed"],
    )


def load_config(path: str | Path) -> ScenarioConfig:
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid TOML: {exc}") from exc
    return parse_config_data(raw)


def load_raw(path: str | Path) -> dict:
    """Raw nested dict of a config file, for sweep axis substitution."""
    with open(path, "rb") as fh:
        return tomllib.load(fh)


def set_numeric_leaf(raw: dict, dotted_key: str, value: float) -> None:
    """Overwrite one numeric leaf addressed as e.g. 'model.mu' in a raw config."""
    parts = dotted_key.split(".")
    node: Any = raw
    for part in parts[:-1]:
        if not isinstance(node, dict) or part not in node:
            raise ConfigError(f"sweep key {dotted_key!r}: no section {part!r}")
        node = node[part]
    leaf = parts[-1]
    if not isinstance(node, dict) or leaf not in node:
        raise ConfigError(f"sweep key {dotted_key!r} does not address an existing key")
    old = node[leaf]
    if isinstance(old, bool) or not isinstance(old, (int, float)):
        raise ConfigError(f"sweep key {dotted_key!r} does not address a numeric leaf")
    node[leaf] = int(value) if isinstance(old, int) and float(value).is_integer() else float(value)
