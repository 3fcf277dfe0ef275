"""Command-line entry point: ``sfgrid {grid,evolve,solve,bench}``.

Options may also come from a ``key=value`` file given with ``--config``
(one pair per line, ``#`` starts a comment); command-line flags win.

Exit codes: 0 success, 1 runtime/numeric error, 2 usage/config error.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path
from typing import Optional

import numpy as np

from . import io as sio
from .bench import compare
from .gridgen import (
    calibrate,
    generate_boundary_layer_grid,
    h_case3,
    step_between,
    step_field,
    uniform_grid,
)
from .kfield import (
    EvolutionParams,
    GradientHistory,
    GridField,
    SMode,
    evolve_constant_m,
    evolve_explicit,
    k_case3_first_order,
)
from .solver import TransportProblem, error_norms, solve

NUMERIC_KEYS = (
    "b", "mu", "h1", "xi", "c", "m0", "m1", "m2", "S", "t", "dt",
    "lo", "hi", "h_uniform", "l1", "l2sq",
)
DEFAULTS = {"lo": 0.0, "hi": 1.0, "c": 1.0}
DEFAULT_OUT = {"grid": "grid.csv", "evolve": "field.csv", "solve": "solution.csv", "bench": "report.csv"}


class ConfigError(Exception):
    """Bad or missing configuration (exit code 2)."""


def read_config(path: str) -> dict[str, str]:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc.strerror}") from None
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value")
        key, value = (part.strip() for part in line.split("=", 1))
        values[key.lstrip("-").replace("-", "_")] = value
    return values


def _number(key: str, value) -> float:
    try:
        x = float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"--{key.replace('_', '-')}: not a number: {value!r}") from None
    if not math.isfinite(x):
        raise ConfigError(f"--{key.replace('_', '-')}: must be finite, got {value!r}")
    return x


def resolve(args: argparse.Namespace) -> dict:
    """Merge defaults, config file and flags (in increasing precedence)."""
    merged: dict = dict(DEFAULTS)
    if args.config:
        file_values = read_config(args.config)
        if "grid_file" in file_values:
            file_values["grid_file"] = [file_values["grid_file"]]
        merged.update(file_values)
    for key, value in vars(args).items():
        if key in ("command", "config") or value is None:
            continue
        merged[key] = value
    cfg = {}
    for key, value in merged.items():
        if key in NUMERIC_KEYS:
            cfg[key] = _number(key, value)
        elif key == "case":
            try:
                cfg[key] = int(value)
            except ValueError:
                raise ConfigError(f"--case: not an integer: {value!r}") from None
        else:
            cfg[key] = value
    cfg.setdefault("out", DEFAULT_OUT[args.command])
    return cfg


def _require(cfg: dict, *keys: str) -> None:
    missing = [k for k in keys if k not in cfg]
    if missing:
        raise ConfigError("missing required option(s): " + ", ".join("--" + k.replace("_", "-") for k in missing))


def run_grid(cfg: dict) -> int:
    _require(cfg, "b", "mu", "h1", "xi")
    spec = calibrate(cfg["b"], cfg["mu"], cfg["h1"], cfg["xi"])
    grid = generate_boundary_layer_grid(spec, cfg["lo"], cfg["hi"])
    sio.write_text(cfg["out"], sio.grid_csv(grid, spec.b, spec.mu))
    print(f"rate={sio.fmt(spec.rate)}")
    print(f"nodes={len(grid)}")
    print(f"wrote {cfg['out']}")
    return 0


def run_evolve(cfg: dict) -> int:
    _require(cfg, "case")
    case = cfg["case"]
    if case not in (1, 2, 3):
        raise ConfigError(f"--case must be 1, 2 or 3, got {case}")
    h0 = cfg.get("h_uniform", 0.1)
    grid = uniform_grid(cfg["lo"], cfg["hi"], h0)
    x = grid.nodes
    c = np.full(x.size, cfg["c"])
    A = cfg.get("h1", h0) * cfg["c"]

    if case == 1:
        k = c.copy()
    elif case == 2:
        _require(cfg, "m0", "S", "t")
        if "dt" in cfg:
            params = EvolutionParams(m0=cfg["m0"], S=cfg["S"], s_mode=SMode.FIXED)
            k = evolve_explicit(GridField.initial(x, c), params, cfg["m0"], cfg["t"], cfg["dt"]).k
        else:
            k = evolve_constant_m(c, cfg["m0"], cfg["S"], cfg["t"])
    else:
        _require(cfg, "S", "mu", "t")
        params = EvolutionParams(
            m0=cfg.get("m0", 0.0), m1=cfg.get("m1", 0.0), m2=cfg.get("m2", 0.0),
            S=cfg["S"], mu=cfg["mu"],
        )
        hist = GradientHistory(l1=cfg.get("l1", 0.0), l2sq=cfg.get("l2sq", 0.0), t=cfg["t"])
        k = np.array([k_case3_first_order(ci, params, hist) for ci in c])

    if case == 3:
        h = np.array([h_case3(ci, A, params, hist) for ci in c])
    else:
        h = np.array([step_field(ki, A) for ki in k])
    sio.write_text(cfg["out"], sio.field_csv(x, k, h))
    steps = [step_between(k[i], k[i + 1], A) for i in range(k.size - 1)]
    print(f"case={case} t={sio.fmt(cfg.get('t', 0.0))} nodes={k.size}")
    print(f"min_step={sio.fmt(min(steps))} max_step={sio.fmt(max(steps))}")
    print(f"wrote {cfg['out']}")
    return 0


def _problem(cfg: dict, lo: float, hi: float) -> TransportProblem:
    return TransportProblem(mu=cfg["mu"], b=cfg["b"], lo=lo, hi=hi)


def run_solve(cfg: dict) -> int:
    _require(cfg, "b", "mu")
    files = cfg.get("grid_file") or []
    if files:
        grid = sio.load_grid(files[-1])
    elif "h_uniform" in cfg:
        grid = uniform_grid(cfg["lo"], cfg["hi"], cfg["h_uniform"])
    else:
        raise ConfigError("solve needs --grid-file or --h-uniform")
    prob = _problem(cfg, grid.lo, grid.hi)
    sol = solve(prob, grid)
    norms = error_norms(sol, prob)
    sio.write_text(cfg["out"], sio.solution_csv(sol, prob))
    print(f"nodes={len(grid)}")
    print(f"linf={sio.fmt(norms['linf'])}")
    print(f"l2w={sio.fmt(norms['l2w'])}")
    print(f"wrote {cfg['out']}")
    return 0


def _try(build):
    try:
        return build()
    except (ValueError, OSError) as exc:
        return exc


def run_bench(cfg: dict) -> int:
    _require(cfg, "b", "mu")
    grids = []
    if "h1" in cfg or "xi" in cfg:
        _require(cfg, "h1", "xi")
        grids.append(("adaptive", _try(lambda: generate_boundary_layer_grid(
            calibrate(cfg["b"], cfg["mu"], cfg["h1"], cfg["xi"]), cfg["lo"], cfg["hi"]))))
    if "h_uniform" in cfg:
        grids.append(("uniform", _try(lambda: uniform_grid(cfg["lo"], cfg["hi"], cfg["h_uniform"]))))
    for path in cfg.get("grid_file") or []:
        grids.append((f"file:{path}", _try(lambda path=path: sio.load_grid(path))))
    if not grids:
        raise ConfigError("bench needs at least one grid (--h1/--xi, --h-uniform or --grid-file)")
    report = compare(_problem(cfg, cfg["lo"], cfg["hi"]), grids)
    text = sio.report_csv(report)
    sio.write_text(cfg["out"], text)
    sys.stdout.write(text)
    print(f"wrote {cfg['out']}")
    return 0


RUNNERS = {"grid": run_grid, "evolve": run_evolve, "solve": run_solve, "bench": run_bench}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    for key in NUMERIC_KEYS:
        common.add_argument("--" + key.replace("_", "-"), dest=key, default=None, metavar="X")
    common.add_argument("--case", default=None, help="evolve: 1 (m=0), 2 (constant m), 3 (gradient law)")
    common.add_argument("--grid-file", dest="grid_file", action="append", default=None,
                        help="grid CSV to read (bench: repeatable)")
    common.add_argument("--out", default=None, help="output CSV path")
    common.add_argument("--config", default=None, help="key=value file; flags override it")

    parser = argparse.ArgumentParser(prog="sfgrid", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("grid", parents=[common], help="generate a Peclet-calibrated boundary-layer grid")
    sub.add_parser("evolve", parents=[common], help="grid field and steps at time t for case 1, 2 or 3")
    sub.add_parser("solve", parents=[common], help="solve the diffusion-transport problem on a grid")
    sub.add_parser("bench", parents=[common], help="compare grids against the exact solution")
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve(args)
        return RUNNERS[args.command](cfg)
    except ConfigError as exc:
        print(f"sfgrid {args.command}: {exc}", file=sys.stderr)
        return 2
    except (ValueError, ArithmeticError, OSError) as exc:
        print(f"sfgrid {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
