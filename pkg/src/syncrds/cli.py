"""Reproducible experiment runner.

Each subcommand drives one diagnostic; (config, seed) determines every emitted
byte, independent of thread count.  Exit codes: 0 success, 2 config error,
3 numerical failure.  A manifest.json records the resolved config and a
checksum of every artifact.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, ExperimentConfig, apply_overrides, build, load_config, make_state
from .diagnostics import (
    attractor_estimate,
    equilibrium_cesaro,
    equilibrium_pushforward,
    interval_concentration,
    invariant_sampler,
    law_distance,
    order_preservation_test,
    sync_curve,
)
from .engines import NewtonConvergenceError
from .grid import GridFunction
from .noise import CirculantEmbeddingError, derive_seed
from .orders import OrderRelation, normality_probe
from .svgplot import line_chart

SUBCOMMANDS = (
    "simulate",
    "pullback",
    "sync-curve",
    "equilibrium",
    "interval-check",
    "normality-probe",
    "order-check",
    "mixing-check",
)

_KS_CRITICAL = 1.36  # 5% two-sample Kolmogorov-Smirnov coefficient


def _fmt(v) -> str:
    if isinstance(v, bool):
        return str(v)
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.17g}"
    return str(v)


def _require_diag(diag: dict, required: dict, optional: dict) -> dict:
    from .config import _require

    return _require(diag, "diagnostic", required, optional)


def _state_components(x) -> list[float]:
    if isinstance(x, GridFunction):
        return [float(v) for v in x.u]
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    return [float(v) for v in arr]


def _grid_align(t: float, dt: float) -> float:
    return round(t / dt) * dt


# -- one runner per subcommand; each returns (columns, rows, plot_series) ------


def _run_simulate(exp: ExperimentConfig):
    p = _require_diag(
        exp.diagnostic,
        {"t_end": float, "record_every": float},
        {"x0": (object, None)},
    )
    engine = exp.engine
    x = engine.default_state() if p["x0"] is None else make_state(engine, p["x0"], "diagnostic.x0")
    t_end, every = p["t_end"], p["record_every"]
    if t_end <= 0 or every <= 0:
        raise ConfigError("t_end and record_every must be positive")
    n_rec = round(t_end / every)
    path = engine.sample_path(exp.seed, 0.0, t_end)
    width = len(_state_components(x))
    columns = ["t"] + (["x"] if width == 1 else [f"x{i}" for i in range(1, width + 1)])
    rows = [[0.0] + _state_components(x)]
    for k in range(n_rec):
        x = engine.evolve(path, x, k * every, (k + 1) * every)
        rows.append([(k + 1) * every] + _state_components(x))
    plot = [("x1", [r[0] for r in rows], [r[1] for r in rows])]
    return columns, rows, ("trajectory", "t", "state", plot)


def _chain_states(engine, levels, where):
    if engine.kind == "spme":
        return [make_state(engine, {"profile": "sine", "amplitude": lv}, where) for lv in levels]
    if engine.kind == "two_wall":
        return [make_state(engine, {"profile": "level", "level": lv}, where) for lv in levels]
    return [make_state(engine, lv, where) for lv in levels]


def _run_pullback(exp: ExperimentConfig):
    p = _require_diag(
        exp.diagnostic,
        {"horizons": list},
        {"chain_levels": (list, [-2.0, -1.0, 0.0, 1.0, 2.0])},
    )
    engine = exp.engine
    horizons = sorted(float(t) for t in p["horizons"])
    if not horizons or horizons[0] <= 0:
        raise ConfigError("horizons must be positive")
    init = _chain_states(engine, p["chain_levels"], "diagnostic.chain_levels")
    t_max = _grid_align(horizons[-1], engine.dt)
    path = engine.sample_path(exp.seed, -t_max, 0.0)
    rows = []
    for t in horizons:
        est = attractor_estimate(engine, path, init, _grid_align(t, engine.dt))
        rows.append([est.t_pullback, est.spread, len(init)])
    plot = [("spread", [r[0] for r in rows], [r[1] for r in rows])]
    return ["t_pullback", "spread", "n_init"], rows, ("pullback spread", "T", "spread", plot)


def _run_sync_curve(exp: ExperimentConfig):
    p = _require_diag(
        exp.diagnostic,
        {"x": object, "y": object, "epsilon": float, "times": list, "n_paths": int},
        {"allow_unordered": (bool, False)},
    )
    engine = exp.engine
    x = make_state(engine, p["x"], "diagnostic.x")
    y = make_state(engine, p["y"], "diagnostic.y")
    curve = sync_curve(
        engine, x, y, p["epsilon"], [float(t) for t in p["times"]],
        p["n_paths"], exp.seed, allow_unordered=p["allow_unordered"], threads=exp.threads,
    )
    rows = [[r.t, curve.epsilon, r.p_hat, r.ci_low, r.ci_high, r.n_paths] for r in curve.rows]
    plot = [("p_hat", [r.t for r in curve.rows], [r.p_hat for r in curve.rows])]
    return (
        ["t", "epsilon", "p_hat", "ci_low", "ci_high", "n_paths"],
        rows,
        ("synchronization curve", "t", "exceedance probability", plot),
    )


def _run_equilibrium(exp: ExperimentConfig):
    p = _require_diag(
        exp.diagnostic,
        {"mode": str, "horizons": list, "burn_in": float, "n_samples": int, "gap": float},
        {"r_points": (int, 8)},
    )
    engine = exp.engine
    if p["mode"] not in ("pushforward", "cesaro"):
        raise ConfigError("equilibrium mode must be 'pushforward' or 'cesaro'")
    mu = invariant_sampler(
        engine, p["burn_in"], p["n_samples"], p["gap"], derive_seed(exp.seed, 0)
    )
    horizons = sorted(_grid_align(float(t), engine.dt) for t in p["horizons"])
    if not horizons or horizons[0] <= 0:
        raise ConfigError("horizons must be positive")
    path = engine.sample_path(derive_seed(exp.seed, 1), -horizons[-1], 0.0)
    rows = []
    for t in horizons:
        if p["mode"] == "pushforward":
            cloud = equilibrium_pushforward(engine, path, mu, t, threads=exp.threads)
        else:
            r_grid = sorted({_grid_align(r, engine.dt) for r in
                             np.linspace(t / 2, t, p["r_points"])})
            cloud = equilibrium_cesaro(engine, path, mu, r_grid, threads=exp.threads)
        rows.append([t, cloud.diameter, len(cloud.states)])
    plot = [("diameter", [r[0] for r in rows], [r[1] for r in rows])]
    return (
        ["t_pullback", "diameter", "n_cloud"],
        rows,
        ("equilibrium cloud diameter", "T", "diameter", plot),
    )


def _run_interval_check(exp: ExperimentConfig):
    p = _require_diag(
        exp.diagnostic,
        {"alpha": float, "burn_in": float, "n_samples": int, "gap": float},
        {"order": (str, "pointwise_leq"), "tol": (float, 1e-10)},
    )
    engine = exp.engine
    order = OrderRelation(kind=p["order"], tol=p["tol"])
    mu = invariant_sampler(
        engine, p["burn_in"], p["n_samples"], p["gap"], derive_seed(exp.seed, 0)
    )
    report = interval_concentration(mu, order, p["alpha"])
    rows = [[report.alpha, report.coverage, report.n_fit, report.n_eval]]
    return ["alpha", "coverage", "n_fit", "n_eval"], rows, None


def _run_normality_probe(exp: ExperimentConfig):
    p = _require_diag(
        exp.diagnostic, {"n_values": list}, {"quad_step": (float, 1e-4)}
    )
    rows = []
    for n in p["n_values"]:
        res = normality_probe(int(n), p["quad_step"])
        rows.append([res.n, res.seminorm, res.ratio])
    plot = [("ratio", [float(r[0]) for r in rows], [r[2] for r in rows])]
    return ["n", "seminorm", "ratio"], rows, ("seminorm growth", "n", "seminorm / n", plot)


def _run_order_check(exp: ExperimentConfig):
    p = _require_diag(
        exp.diagnostic,
        {"trials": int, "t_horizon": float},
        {"order": (str, "natural"), "tol": (float, 1e-10)},
    )
    order = None if p["order"] == "natural" else OrderRelation(kind=p["order"], tol=p["tol"])
    report = order_preservation_test(
        exp.engine, order, p["trials"], p["t_horizon"], exp.seed,
        tol=p["tol"], threads=exp.threads,
    )
    rows = [[report.trials, report.violations, report.worst, report.tol]]
    return ["trials", "violations", "worst", "tol"], rows, None


def _run_mixing_check(exp: ExperimentConfig):
    p = _require_diag(
        exp.diagnostic,
        {"t": float, "n_paths": int},
        {"starts": (list, [-5.0, 5.0]), "checks": (list, ["two_start", "pullback_vs_forward"])},
    )
    engine = exp.engine
    t, n = p["t"], p["n_paths"]
    if engine.kind in ("spme", "two_wall"):
        raise ConfigError("mixing-check compares scalar laws; use a scalar engine")
    a = make_state(engine, p["starts"][0], "diagnostic.starts")
    b = make_state(engine, p["starts"][1], "diagnostic.starts")
    critical = _KS_CRITICAL * np.sqrt(2.0 / n)
    rows = []

    def forward(x0, stream0):
        return [
            engine.evolve(engine.sample_path(derive_seed(exp.seed, stream0 + i), 0.0, t), x0, 0.0, t)
            for i in range(n)
        ]

    for check in p["checks"]:
        if check == "two_start":
            rows.append(["two_start", law_distance(forward(a, 0), forward(b, n)), critical, n])
        elif check == "pullback_vs_forward":
            fwd = forward(a, 2 * n)
            back = [
                engine.evolve(
                    engine.sample_path(derive_seed(exp.seed, 3 * n + i), -t, 0.0), a, -t, 0.0
                )
                for i in range(n)
            ]
            rows.append(["pullback_vs_forward", law_distance(fwd, back), critical, n])
        else:
            raise ConfigError(f"unknown mixing check {check!r}")
    return ["check", "statistic", "critical", "n"], rows, None


_RUNNERS = {
    "simulate": _run_simulate,
    "pullback": _run_pullback,
    "sync-curve": _run_sync_curve,
    "equilibrium": _run_equilibrium,
    "interval-check": _run_interval_check,
    "normality-probe": _run_normality_probe,
    "order-check": _run_order_check,
    "mixing-check": _run_mixing_check,
}


def _write_artifacts(exp: ExperimentConfig, subcommand: str, columns, rows, plot_spec):
    out_dir = Path(exp.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = subcommand.replace("-", "_")
    artifacts = {}

    if "csv" in exp.formats:
        csv_path = out_dir / f"{stem}.csv"
        lines = [",".join(columns)]
        lines += [",".join(_fmt(v) for v in row) for row in rows]
        csv_path.write_text("\n".join(lines) + "\n")
        artifacts[csv_path.name] = csv_path

    if "json" in exp.formats:
        report_path = out_dir / "report.json"
        payload = {
            "subcommand": subcommand,
            "columns": list(columns),
            "rows": [[v if isinstance(v, str) else float(v) for v in row] for row in rows],
        }
        report_path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")
        artifacts[report_path.name] = report_path

    if exp.plot and plot_spec is not None:
        title, xlabel, ylabel, series = plot_spec
        svg_path = out_dir / f"{stem}.svg"
        svg_path.write_text(line_chart(series, title, xlabel, ylabel))
        artifacts[svg_path.name] = svg_path

    manifest = {
        "version": __version__,
        "subcommand": subcommand,
        "seed": exp.seed,
        "threads": exp.threads,
        "config": exp.resolved,
        "artifacts": {
            name: hashlib.sha256(path.read_bytes()).hexdigest()
            for name, path in sorted(artifacts.items())
        },
    }
    (out_dir / "manifest.json").write_text(json.dumps(manifest, sort_keys=True, indent=2) + "\n")


def run(subcommand: str, config_path: str, overrides: list[str]) -> int:
    """Execute one diagnostic; returns the process exit code."""
    try:
        raw = apply_overrides(load_config(config_path), overrides)
        exp = build(raw)
        out = Path(exp.out_dir)
        if not out.is_absolute():  # paths are relative to the config file
            exp.out_dir = str(Path(config_path).resolve().parent / out)
        columns, rows, plot_spec = _RUNNERS[subcommand](exp)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 2
    except (NewtonConvergenceError, CirculantEmbeddingError, FloatingPointError) as err:
        print(f"numerical failure: {err}", file=sys.stderr)
        return 3
    except (ValueError, ArithmeticError) as err:
        print(f"numerical failure: {err}", file=sys.stderr)
        return 3
    except Exception as err:  # contract: report and exit, never a traceback
        print(f"numerical failure: {type(err).__name__}: {err}", file=sys.stderr)
        return 3
    _write_artifacts(exp, subcommand, columns, rows, plot_spec)
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="syncrds",
        description="Monte Carlo diagnostics for order-preserving random dynamical systems",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in SUBCOMMANDS:
        sp = sub.add_parser(name, help=f"run the {name} diagnostic")
        sp.add_argument("config", help="TOML experiment configuration")
        sp.add_argument(
            "--set", dest="overrides", action="append", default=[],
            metavar="KEY=VALUE", help="override a config entry (dotted path)",
        )
    args = parser.parse_args(argv)
    return run(args.subcommand, args.config, args.overrides)


if __name__ == "__main__":
    sys.exit(main())
