"""Command-line front end: ``btsgap solve | critical | sweep``.

Exit codes: 0 success, 1 usage or validation error, 2 convergence failure,
3 critical-beta search-range failure.

Every option may also come from a JSON file given with ``--config``; flags
on the command line win.  A sweep manifest is itself a valid config file,
so ``btsgap sweep --config out.manifest.json`` repeats that run.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .critical import critical_beta_oracle, find_critical_beta
from .errors import BTSError, DomainError, SearchRangeError, UnsupportedBranchError
from .experiments import (Mode, SweepSpec, Vary, dump_manifest, run_manifest, run_sweep, write_csv)
from .kernel_math import ModelParams
from .monotone_solve import SolveConfig
from .schemes import IterationConfig, SchemeKind, make_parts, solve

EXIT_OK, EXIT_USAGE, EXIT_CONVERGENCE, EXIT_RANGE = 0, 1, 2, 3
OUTPUT_DIR_ENV = "BTSGAP_OUTPUT_DIR"

DEFAULTS = {
    "n": 50,
    "n_b": None,
    "scheme": "both",
    "format": "text",
    "outer_tol": 1e-10,
    "inner_tol": 1e-12,
    "max_outer": 10_000,
    "positivity_eps": 1e-8,
    "tol": 1e-3,
    "search_lo": 1e-3,
    "search_hi": 100.0,
    "oracle": False,
    "mode": "solution",
    "workers": 1,
}
REQUIRED = {
    "solve": ("a", "b", "k1", "k2", "beta"),
    "critical": ("a", "b", "k1", "k2"),
    "sweep": ("a", "b", "k1", "k2", "vary"),
}
# keys that never enter a reproducibility record
NOT_RECORDED = ("config", "command", "output", "workers")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _decimal(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a decimal number: {text!r}") from None
    if not math.isfinite(value):
        raise argparse.ArgumentTypeError(f"not a finite number: {text!r}")
    return value


def _count(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be at least 1: {text!r}")
    return value


def _int_list(text: str) -> list[int]:
    return [_count(x) for x in text.split(",") if x.strip()]


def _float_list(text: str) -> list[float]:
    return [_decimal(x) for x in text.split(",") if x.strip()]


def _common(p: argparse.ArgumentParser) -> None:
    # defaults stay None so that config-file values can be told apart from flags
    p.add_argument("--config", help="JSON file with option values; flags override it")
    p.add_argument("--a", type=_decimal, help="phonon cutoff a > 0")
    p.add_argument("--b", type=_decimal, help="Coulomb cutoff b > a")
    p.add_argument("--k1", type=_decimal, help="phonon coupling K1 > 0")
    p.add_argument("--k2", type=_decimal, help="Coulomb coupling K2 > 0")
    p.add_argument("--n", type=_count, help="cells on [0, a] (default 50)")
    p.add_argument("--n-b", dest="n_b", type=_count, help="cells on [a, b] (default: same as --n)")
    p.add_argument("--scheme", choices=("min", "max", "both"), help="default both")
    p.add_argument("--format", choices=("text", "json", "csv"),
                   help="stdout format for solve/critical, file format for sweep")
    p.add_argument("--outer-tol", dest="outer_tol", type=_decimal)
    p.add_argument("--inner-tol", dest="inner_tol", type=_decimal)
    p.add_argument("--max-outer", dest="max_outer", type=_count)
    p.add_argument("--positivity-eps", dest="positivity_eps", type=_decimal)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="btsgap", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"btsgap {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("solve", help="solve the scheme(s) at one beta")
    _common(p)
    p.add_argument("--beta", type=_decimal)

    p = sub.add_parser("critical", help="bisect for the critical beta of each scheme")
    _common(p)
    p.add_argument("--tol", type=_decimal, help="relative bracket width (default 1e-3)")
    p.add_argument("--search-lo", dest="search_lo", type=_decimal)
    p.add_argument("--search-hi", dest="search_hi", type=_decimal)
    p.add_argument("--oracle", action="store_true", default=None,
                   help="also report the linearisation root (K1 > K2 only)")

    p = sub.add_parser("sweep", help="parameter sweep written as CSV plus a JSON manifest")
    _common(p)
    p.add_argument("--vary", choices=("beta", "a", "k2", "n"))
    p.add_argument("--from", dest="start", type=_decimal)
    p.add_argument("--to", dest="stop", type=_decimal)
    p.add_argument("--steps", type=_count, help="number of grid points from --from to --to")
    p.add_argument("--grid", type=_float_list, help="explicit comma-separated grid")
    p.add_argument("--n-list", dest="n_list", type=_int_list, help="cell counts, e.g. 50,100,200")
    p.add_argument("--mode", choices=("solution", "critical"))
    p.add_argument("--beta", type=_decimal)
    p.add_argument("--tol", type=_decimal)
    p.add_argument("--search-lo", dest="search_lo", type=_decimal)
    p.add_argument("--search-hi", dest="search_hi", type=_decimal)
    p.add_argument("--output", help=f"CSV path (default: ${OUTPUT_DIR_ENV} or the working directory)")
    p.add_argument("--workers", type=_count, help="processes for grid points (output unchanged)")
    return parser


def load_config(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    if not isinstance(data, dict):
        raise UsageError(f"config {path} must hold a JSON object")
    # a manifest written by `sweep` carries the resolved options under "cli"
    return dict(data.get("cli", data))


def resolve(args: argparse.Namespace) -> dict:
    """Merge defaults, config file and explicit flags (in increasing priority)."""
    flags = {k: v for k, v in vars(args).items() if v is not None}
    config = load_config(args.config) if args.config else {}
    opts = {**DEFAULTS, **config, **flags}
    missing = [k for k in REQUIRED[args.command] if opts.get(k) is None]
    if missing:
        raise UsageError("missing required option(s): " + ", ".join("--" + m.replace("_", "-")
                                                                    for m in missing))
    return opts


def _params(opts: dict) -> ModelParams:
    return ModelParams(float(opts["a"]), float(opts["b"]), float(opts["k1"]), float(opts["k2"]))


def _iteration(opts: dict) -> IterationConfig:
    try:
        inner = SolveConfig(abs_tol=float(opts["inner_tol"]))
        return IterationConfig(outer_tol=float(opts["outer_tol"]), inner=inner,
                               max_outer=int(opts["max_outer"]),
                               positivity_eps=float(opts["positivity_eps"]))
    except (TypeError, ValueError) as exc:
        raise DomainError(str(exc)) from None


def _schemes(opts: dict) -> tuple[SchemeKind, ...]:
    choice = opts["scheme"]
    if choice == "both":
        return (SchemeKind.MIN_MIXED, SchemeKind.MAX_MIXED)
    try:
        return (SchemeKind(choice),)
    except ValueError:
        raise UsageError(f"unknown scheme {choice!r}") from None


def _fmt(x: float) -> str:
    return format(x, ".12g")


def cmd_solve(opts: dict) -> int:
    params = _params(opts)
    cfg = _iteration(opts)
    beta = float(opts["beta"])
    if not beta > 0:
        raise DomainError("beta must be positive")
    parts = make_parts(params, int(opts["n"]), opts["n_b"] and int(opts["n_b"]))
    records = []
    for kind in _schemes(opts):
        res = solve(params, beta, parts, kind, cfg)
        records.append({
            "scheme": kind.label, "phase": res.phase.value, "u": res.pair.u, "v": res.pair.v,
            "delta1": res.pair.delta1, "delta2": res.pair.delta2, "iterations": res.iterations,
            "residual": list(res.residual), "converged": res.converged,
        })
    if opts["format"] == "json":
        print(json.dumps({"beta": beta, "params": params.as_dict(), "results": records}, indent=2))
    else:
        for r in records:
            print(f"{r['scheme']}: {r['phase']}  u={_fmt(r['u'])}  v={_fmt(r['v'])}  "
                  f"delta1={_fmt(r['delta1'])}  delta2={_fmt(r['delta2'])}  "
                  f"iterations={r['iterations']}  "
                  f"residual=({r['residual'][0]:.3e}, {r['residual'][1]:.3e})"
                  + ("" if r["converged"] else "  NOT CONVERGED"))
    return EXIT_OK if all(r["converged"] for r in records) else EXIT_CONVERGENCE


def cmd_critical(opts: dict) -> int:
    params = _params(opts)
    cfg = _iteration(opts)
    parts = make_parts(params, int(opts["n"]), opts["n_b"] and int(opts["n_b"]))
    search = (float(opts["search_lo"]), float(opts["search_hi"]))
    tol = float(opts["tol"])
    out: dict = {"params": params.as_dict(), "n_cells": parts.a_part.n, "tol": tol}
    failed = []
    for kind in _schemes(opts):
        try:
            est = find_critical_beta(params, parts, kind, search, tol, cfg)
        except SearchRangeError as exc:
            failed.append(str(exc))
            out[kind.label] = {"error": "search-range", "message": str(exc)}
            continue
        out[kind.label] = {"beta_c": est.beta_c, "beta_lo": est.beta_lo, "beta_hi": est.beta_hi,
                           "tau_c": est.tau_c, "probes": est.probes}
    if opts["oracle"]:
        try:
            out["oracle"] = {"beta_lin": critical_beta_oracle(params)}
        except UnsupportedBranchError:
            out["oracle"] = {"error": "unsupported-branch"}
        except SearchRangeError as exc:
            out["oracle"] = {"error": "search-range", "message": str(exc)}

    if opts["format"] == "json":
        print(json.dumps(out, indent=2))
    else:
        primes = {"min-mixed": "'", "max-mixed": "''"}
        for label, mark in primes.items():
            rec = out.get(label)
            if rec is None:
                continue
            if "error" in rec:
                print(f"beta{mark}_c ({label}): search-range failure: {rec['message']}")
                continue
            print(f"beta{mark}_c ({label}) = {_fmt(rec['beta_c'])}  "
                  f"bracket [{_fmt(rec['beta_lo'])}, {_fmt(rec['beta_hi'])}]  "
                  f"tau{mark}_c = {_fmt(rec['tau_c'])}")
        if "oracle" in out:
            rec = out["oracle"]
            if "beta_lin" in rec:
                print(f"beta_lin (linearised continuous system) = {_fmt(rec['beta_lin'])}  "
                      f"tau_lin = {_fmt(1.0 / rec['beta_lin'])}")
            else:
                print(f"beta_lin: {rec['error']}")
    for msg in failed:
        print(msg, file=sys.stderr)
    return EXIT_RANGE if failed else EXIT_OK


def _grid(opts: dict) -> tuple:
    if opts["vary"] == "n":
        if not opts.get("n_list"):
            raise UsageError("--vary n needs --n-list")
        return tuple(int(x) for x in opts["n_list"])
    if opts.get("grid"):
        return tuple(float(x) for x in opts["grid"])
    if None in (opts.get("start"), opts.get("stop"), opts.get("steps")):
        raise UsageError("give --grid or all of --from, --to, --steps")
    pts = np.linspace(float(opts["start"]), float(opts["stop"]), int(opts["steps"]))
    # strip representation noise such as 0.15000000000000002
    return tuple(float(format(x, ".12g")) for x in pts)


def _output_path(opts: dict) -> Path:
    if opts.get("output"):
        return Path(opts["output"])
    base = Path(os.environ.get(OUTPUT_DIR_ENV, "."))
    ext = "json" if opts["format"] == "json" else "csv"
    return base / f"sweep-{opts['vary']}-{opts['mode']}.{ext}"


def cmd_sweep(opts: dict) -> int:
    if opts.get("n_b") is not None:
        raise UsageError("sweeps use equal cell counts on both intervals; drop --n-b")
    params = _params(opts)
    cfg = _iteration(opts)
    vary = Vary(opts["vary"])
    mode = Mode(opts["mode"])
    beta = None if vary is Vary.BETA else opts.get("beta")
    if mode is Mode.CRITICAL:
        beta = None
    spec = SweepSpec(vary, _grid(opts), params, beta=beta, n_cells=int(opts["n"]),
                     schemes=_schemes(opts), mode=mode, iteration=cfg,
                     search=(float(opts["search_lo"]), float(opts["search_hi"])),
                     tol=float(opts["tol"]), workers=int(opts["workers"]))
    table = run_sweep(spec)
    path = _output_path(opts)
    path.parent.mkdir(parents=True, exist_ok=True)
    if opts["format"] == "json":
        with open(path, "w", encoding="utf-8") as fh:
            json.dump({"columns": list(table.columns), "rows": [list(r) for r in table.rows]}, fh,
                      indent=2)
            fh.write("\n")
    else:
        write_csv(table, path)
    recorded = {k: v for k, v in opts.items() if k not in NOT_RECORDED}
    recorded["command"] = "sweep"
    stamp = datetime.now(timezone.utc).isoformat(timespec="seconds")
    manifest = run_manifest(spec, __version__, stamp, extra={"cli": recorded,
                                                             "output": str(path)})
    manifest_path = path.with_name(path.stem + ".manifest.json")
    dump_manifest(manifest, manifest_path)

    status_col = table.columns.index("status") if "status" in table.columns else None
    conv_col = table.columns.index("converged")
    ok_rows = sum(1 for r in table.rows
                  if r[conv_col] and (status_col is None or r[status_col] == "ok"))
    verdicts = " ".join(f"{k}={'pass' if v else 'fail'}" for k, v in table.verdicts.items())
    print(f"wrote {len(table.rows)} rows ({ok_rows} ok) to {path}; manifest {manifest_path}")
    if verdicts:
        print(f"trend verdicts: {verdicts}")
    return EXIT_OK if ok_rows else EXIT_CONVERGENCE


COMMANDS = {"solve": cmd_solve, "critical": cmd_critical, "sweep": cmd_sweep}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # --help, --version and argument errors
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        opts = resolve(args)
        return COMMANDS[args.command](opts)
    except (UsageError, DomainError) as exc:
        print(f"btsgap {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BTSError as exc:
        print(f"btsgap {args.command}: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE


if __name__ == "__main__":
    sys.exit(main())
