"""Experiment configuration: TOML loading, overrides, validation, builders.

A config file has [engine], [noise], [diagnostic] and [output] sections plus a
top-level thread count.  Validation is strict: unknown keys are rejected so a
typo cannot silently fall back to a default.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

try:
    import tomllib  # Python >= 3.11
except ModuleNotFoundError:  # pragma: no cover - depends on interpreter
    import tomli as tomllib

from .engines import (
    CocycleEngine,
    FbmConfig,
    ReflectedConfig,
    SpmeConfig,
    TwoWallConfig,
    make_drift,
    make_engine,
)
from .grid import GridFunction, GridSpec
from .noise import QSpec

__all__ = ["ConfigError", "ExperimentConfig", "load_config", "apply_overrides", "build"]

ENGINE_KINDS = ("ou", "fbm_sde", "reflected", "torus", "spme", "two_wall")


class ConfigError(Exception):
    """Any malformed configuration input; the CLI maps this to exit code 2."""


@dataclass
class ExperimentConfig:
    engine: CocycleEngine
    seed: int
    diagnostic: dict
    out_dir: str
    formats: tuple[str, ...]
    plot: bool
    threads: int
    resolved: dict  # the fully resolved raw mapping, recorded in the manifest


def load_config(path: str) -> dict:
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except FileNotFoundError as err:
        raise ConfigError(f"config file not found: {path}") from err
    except tomllib.TOMLDecodeError as err:
        raise ConfigError(f"config file {path} is not valid TOML: {err}") from err


def apply_overrides(cfg: dict, overrides: list[str]) -> dict:
    """Apply `--set section.key=value` pairs; values parse as TOML literals."""
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not of the form key=value")
        dotted, raw_value = item.split("=", 1)
        keys = dotted.strip().split(".")
        try:
            value = tomllib.loads(f"v = {raw_value}")["v"]
        except tomllib.TOMLDecodeError:
            value = raw_value  # bare string
        node = cfg
        for k in keys[:-1]:
            node = node.setdefault(k, {})
            if not isinstance(node, dict):
                raise ConfigError(f"override {dotted!r} descends into a non-table")
        node[keys[-1]] = value
    return cfg


def _require(block: dict, where: str, required: dict, optional: dict) -> dict:
    """Extract and type-check keys; anything unknown is an error."""
    out = {}
    unknown = set(block) - set(required) - set(optional)
    if unknown:
        raise ConfigError(f"unknown key(s) in [{where}]: {', '.join(sorted(unknown))}")
    for key, typ in required.items():
        if key not in block:
            raise ConfigError(f"missing required key '{key}' in [{where}]")
        out[key] = _coerce(block[key], typ, f"{where}.{key}")
    for key, (typ, default) in optional.items():
        out[key] = _coerce(block[key], typ, f"{where}.{key}") if key in block else default
    return out


def _coerce(value, typ, where: str):
    if typ is object:
        return value
    if typ is float and isinstance(value, (int, float)) and not isinstance(value, bool):
        return float(value)
    if typ is int and isinstance(value, int) and not isinstance(value, bool):
        return value
    if typ is bool and isinstance(value, bool):
        return value
    if typ is str and isinstance(value, str):
        return value
    if typ is list and isinstance(value, list):
        return value
    if typ is dict and isinstance(value, dict):
        return value
    raise ConfigError(f"{where} must be of type {typ.__name__}, got {value!r}")


def _build_drift(block, where: str):
    if not isinstance(block, dict) or "kind" not in block:
        raise ConfigError(f"[{where}] must be a table with a 'kind'")
    kind = block["kind"]
    try:
        if kind == "linear":
            return make_drift("linear", lam=block.get("lam", 1.0))
        if kind in ("double_well", "zero"):
            extra = set(block) - {"kind"}
            if extra:
                raise ConfigError(f"unknown key(s) in [{where}]: {', '.join(sorted(extra))}")
            return make_drift(kind)
        if kind == "table":
            return make_drift("table", x=block["x"], y=block["y"])
    except (KeyError, ValueError) as err:
        raise ConfigError(f"bad drift in [{where}]: {err}") from err
    raise ConfigError(f"unknown drift kind {kind!r} in [{where}]")


def _build_qspec(block: dict, grid_n: int, length: float) -> QSpec:
    if "q" in block:
        q = [float(v) for v in block["q"]]
    else:
        rule = block.get("q_rule", "one_over_i")
        n_modes = int(block.get("n_modes", grid_n))
        scale = float(block.get("q_scale", 1.0))
        if rule == "one_over_i":
            q = [scale / i for i in range(1, n_modes + 1)]
        elif rule == "constant":
            q = [scale] * n_modes
        else:
            raise ConfigError(f"unknown q_rule {rule!r}")
    return QSpec(n_modes=len(q), q=tuple(q), domain_length=length)


def build_engine(block: dict) -> CocycleEngine:
    if "kind" not in block:
        raise ConfigError("missing required key 'kind' in [engine]")
    kind = block["kind"]
    if kind not in ENGINE_KINDS:
        raise ConfigError(f"unknown engine kind {kind!r}; expected one of {ENGINE_KINDS}")
    try:
        if kind in ("ou", "torus"):
            spec = _require(block, "engine", {"kind": str, "dt": float}, {})
            return make_engine(kind, spec["dt"])
        if kind == "fbm_sde":
            spec = _require(
                block, "engine",
                {"kind": str, "dt": float, "hurst": float, "drift": dict},
                {"ode_substeps": (int, 1)},
            )
            cfg = FbmConfig(
                hurst=spec["hurst"],
                drift=_build_drift(spec["drift"], "engine.drift"),
                ode_substeps=spec["ode_substeps"],
            )
            return make_engine(kind, spec["dt"], cfg)
        if kind == "reflected":
            spec = _require(
                block, "engine",
                {"kind": str, "dt": float, "lower": float, "upper": float, "drift": dict},
                {},
            )
            cfg = ReflectedConfig(
                lower=spec["lower"], upper=spec["upper"],
                drift=_build_drift(spec["drift"], "engine.drift"),
            )
            return make_engine(kind, spec["dt"], cfg)
        if kind == "spme":
            spec = _require(
                block, "engine",
                {"kind": str, "dt": float, "m": float, "grid_n": int},
                {
                    "grid_length": (float, 1.0),
                    "q": (list, None),
                    "q_rule": (str, "one_over_i"),
                    "n_modes": (int, 0),
                    "q_scale": (float, 1.0),
                    "newton_tol": (float, 1e-12),
                    "newton_max_iter": (int, 40),
                    "jac_reg": (float, 1e-12),
                },
            )
            grid = GridSpec(length=spec["grid_length"], n_interior=spec["grid_n"])
            qblock = {k: block[k] for k in ("q", "q_rule", "n_modes", "q_scale") if k in block}
            qspec = _build_qspec(qblock, spec["grid_n"], spec["grid_length"])
            cfg = SpmeConfig(
                grid=grid, m=spec["m"], qspec=qspec,
                newton_tol=spec["newton_tol"],
                newton_max_iter=spec["newton_max_iter"],
                jac_reg=spec["jac_reg"],
            )
            return make_engine(kind, spec["dt"], cfg)
        if kind == "two_wall":
            spec = _require(
                block, "engine",
                {"kind": str, "dt": float, "n_nodes": int, "drift": dict},
                {
                    "length": (float, 1.0),
                    "wall_lower": (float, -1.0),
                    "wall_upper": (float, 1.0),
                },
            )
            n = spec["n_nodes"]
            cfg = TwoWallConfig(
                n_nodes=n,
                length=spec["length"],
                h1=np.full(n, spec["wall_lower"]),
                h2=np.full(n, spec["wall_upper"]),
                drift=_build_drift(spec["drift"], "engine.drift"),
            )
            return make_engine(kind, spec["dt"], cfg)
    except (ValueError, TypeError) as err:
        raise ConfigError(f"bad [engine] block: {err}") from err
    raise AssertionError("unreachable")


def make_state(engine: CocycleEngine, spec, where: str):
    """Build an engine state from a config value.

    Scalar engines accept a number.  Grid engines accept a table:
    {profile="constant"|"sine", amplitude=a} for spme and, for two_wall,
    {profile="level", level=fraction} placing the state between the walls.
    """
    if engine.kind in ("ou", "fbm_sde", "reflected", "torus"):
        if isinstance(spec, (int, float)) and not isinstance(spec, bool):
            return float(spec)
        raise ConfigError(f"{where}: {engine.kind} states are numbers, got {spec!r}")
    if not isinstance(spec, dict) or "profile" not in spec:
        raise ConfigError(f"{where}: grid states need a table with a 'profile'")
    profile = spec["profile"]
    if engine.kind == "spme":
        grid = engine.config.grid
        amp = float(spec.get("amplitude", 1.0))
        if profile == "constant":
            return GridFunction(grid, np.full(grid.n_interior, amp))
        if profile == "sine":
            return GridFunction(grid, amp * np.sin(np.pi * grid.nodes / grid.length))
        raise ConfigError(f"{where}: unknown spme profile {profile!r}")
    if engine.kind == "two_wall":
        cfg = engine.config
        if profile == "level":
            lvl = float(spec.get("level", 0.5))
            if not 0.0 <= lvl <= 1.0:
                raise ConfigError(f"{where}: level must lie in [0, 1]")
            return cfg.h1 + lvl * (cfg.h2 - cfg.h1)
        raise ConfigError(f"{where}: unknown two_wall profile {profile!r}")
    raise ConfigError(f"{where}: no state builder for engine {engine.kind}")


def build(cfg: dict) -> ExperimentConfig:
    """Validate the raw mapping and construct the runnable configuration."""
    unknown = set(cfg) - {"engine", "noise", "diagnostic", "output", "threads"}
    if unknown:
        raise ConfigError(f"unknown top-level key(s): {', '.join(sorted(unknown))}")
    for section in ("engine", "noise"):
        if section not in cfg or not isinstance(cfg[section], dict):
            raise ConfigError(f"missing [{section}] section")

    engine = build_engine(cfg["engine"])

    noise = _require(cfg["noise"], "noise", {"seed": int}, {"dt": (float, engine.dt)})
    if abs(noise["dt"] - engine.dt) > 1e-12 * engine.dt:
        raise ConfigError(
            f"noise.dt={noise['dt']} must equal engine.dt={engine.dt} "
            "(paths are sampled on the scheme grid)"
        )

    out_block = cfg.get("output", {})
    out = _require(
        out_block, "output", {},
        {"directory": (str, "out"), "formats": (list, ["csv", "json"]), "plot": (bool, False)},
    )
    formats = tuple(out["formats"])
    bad = set(formats) - {"csv", "json"}
    if bad:
        raise ConfigError(f"unknown output format(s): {', '.join(sorted(bad))}")

    threads = cfg.get("threads")
    if threads is None:
        threads = int(os.environ.get("SYNCRDS_THREADS", "1"))
    if not isinstance(threads, int) or isinstance(threads, bool) or threads < 1:
        raise ConfigError(f"threads must be a positive integer, got {threads!r}")

    diagnostic = cfg.get("diagnostic", {})
    if not isinstance(diagnostic, dict):
        raise ConfigError("[diagnostic] must be a table")

    return ExperimentConfig(
        engine=engine,
        seed=noise["seed"],
        diagnostic=diagnostic,
        out_dir=out["directory"],
        formats=formats,
        plot=out["plot"],
        threads=threads,
        resolved=cfg,
    )
