"""Parameter sweeps over beta, a, K2 and the cell count, with CSV and manifests."""

from __future__ import annotations

import csv
import enum
import io
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Iterable, Sequence

from .critical import DEFAULT_SEARCH, find_critical_beta
from .errors import BTSError, DomainError, SearchRangeError
from .kernel_math import ModelParams, check_beta
from .monotone_solve import SolveConfig
from .schemes import (CaseBranch, IterationConfig, Phase, SchemeKind, make_parts, solve,
                      supersolution_bound)

CSV_DIGITS = 12


class Vary(enum.Enum):
    BETA = "beta"
    CUTOFF_A = "a"
    COUPLING_K2 = "k2"
    REFINEMENT = "n"

    @property
    def column(self) -> str:
        return "n_cells" if self is Vary.REFINEMENT else self.value


class Mode(enum.Enum):
    SOLUTION = "solution"
    CRITICAL = "critical"


SOLUTION_COLUMNS = ("scheme", "phase", "u", "v", "iterations", "converged", "status")
REFINEMENT_COLUMNS = ("n_cells", "scheme", "u", "v", "iterations", "converged")
CRITICAL_COLUMNS = ("scheme", "beta_c", "beta_lo", "beta_hi", "tau_c", "iterations", "converged",
                    "status")


@dataclass(frozen=True)
class SweepSpec:
    vary: Vary
    grid: tuple
    base: ModelParams
    beta: float | None = None
    n_cells: int = 50
    schemes: tuple[SchemeKind, ...] = (SchemeKind.MIN_MIXED,)
    mode: Mode = Mode.SOLUTION
    iteration: IterationConfig = IterationConfig()
    search: tuple[float, float] = DEFAULT_SEARCH
    tol: float = 1e-3
    # parallelism does not change the output
    workers: int = 1

    def __post_init__(self):
        grid = tuple(int(x) if self.vary is Vary.REFINEMENT else float(x) for x in self.grid)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "schemes", tuple(self.schemes))
        if not grid:
            raise DomainError("sweep grid must not be empty")
        if any(y <= x for x, y in zip(grid, grid[1:])):
            raise DomainError("sweep grid must be strictly increasing")
        if not self.schemes:
            raise DomainError("at least one scheme is required")
        if self.vary is Vary.BETA:
            if self.mode is not Mode.SOLUTION or self.beta is not None:
                raise DomainError("a beta sweep is a solution sweep with beta taken from the grid")
            for b in grid:
                check_beta(b)
        elif self.mode is Mode.SOLUTION:
            if self.beta is None:
                raise DomainError("solution mode needs a fixed beta")
            check_beta(self.beta)
        elif self.beta is not None:
            raise DomainError("critical mode searches over beta; do not fix one")
        if self.vary is Vary.REFINEMENT:
            if self.mode is not Mode.SOLUTION:
                raise DomainError("refinement sweeps run in solution mode")
            if grid[0] < 1 or any(y % x for x, y in zip(grid, grid[1:])):
                raise DomainError(f"cell counts must be nested (each divides the next), got {grid}")
        elif self.n_cells < 1:
            raise DomainError("n_cells must be positive")


@dataclass
class SweepTable:
    columns: tuple[str, ...]
    rows: list[tuple] = field(default_factory=list)
    provenance: dict | None = None
    verdicts: dict[str, bool] = field(default_factory=dict)

    def column(self, name: str, scheme: SchemeKind | None = None) -> list:
        idx = self.columns.index(name)
        if scheme is None:
            return [row[idx] for row in self.rows]
        s_idx = self.columns.index("scheme")
        return [row[idx] for row in self.rows if row[s_idx] == scheme.label]

    def as_dicts(self) -> list[dict]:
        return [dict(zip(self.columns, row)) for row in self.rows]


def check_trend(values: Sequence[float | None], increasing: bool, strict: bool = True,
                slack: int = 1, tol: float = 0.0) -> bool:
    """Do consecutive values move in the stated direction?

    A step within tol of zero is flat.  Flat steps are free for non-strict
    claims and limited to ``slack`` for strict ones.  Any step against the
    direction by more than tol fails.  None entries (failed rows) are skipped.
    """
    vals = [x for x in values if x is not None]
    flat = 0
    for x, y in zip(vals, vals[1:]):
        d = (y - x) if increasing else (x - y)
        if d < -tol:
            return False
        if abs(d) <= tol:
            flat += 1
    return not strict or flat <= slack


def _solution_row(params: ModelParams, beta: float, n: int, scheme: SchemeKind,
                  cfg: IterationConfig) -> dict:
    result = solve(params, beta, make_parts(params, n), scheme, cfg)
    return {"scheme": scheme.label, "phase": result.phase.value, "u": result.pair.u,
            "v": result.pair.v, "iterations": result.iterations, "converged": result.converged,
            "status": "ok" if result.converged else "no-convergence"}


def _critical_row(params: ModelParams, n: int, scheme: SchemeKind, search, tol,
                  cfg: IterationConfig) -> dict:
    est = find_critical_beta(params, n, scheme, search, tol, cfg)
    return {"scheme": scheme.label, "beta_c": est.beta_c, "beta_lo": est.beta_lo,
            "beta_hi": est.beta_hi, "tau_c": est.tau_c, "iterations": est.probes,
            "converged": True, "status": "ok"}


def _run_task(task: tuple) -> dict:
    kind, args = task
    scheme = args[2] if kind == "critical" else args[3]
    try:
        if isinstance(args[0], BTSError):
            raise args[0]
        if kind == "critical":
            return _critical_row(*args)
        return _solution_row(*args)
    except DomainError:
        status = "domain-error"
    except SearchRangeError:
        status = "search-range-error"
    except BTSError:
        status = "no-convergence"
    return {"scheme": scheme.label, "converged": False, "status": status}


def _params_at(spec: SweepSpec, x: float):
    try:
        if spec.vary is Vary.CUTOFF_A:
            return spec.base.replace(a=x)
        if spec.vary is Vary.COUPLING_K2:
            return spec.base.replace(k2=x)
        return spec.base
    except DomainError as exc:
        return exc


def _tasks(spec: SweepSpec) -> list[tuple]:
    tasks = []
    for x in spec.grid:
        params = _params_at(spec, x)
        for scheme in spec.schemes:
            if spec.mode is Mode.CRITICAL:
                tasks.append(("critical", (params, spec.n_cells, scheme, spec.search, spec.tol,
                                           spec.iteration)))
            else:
                beta = x if spec.vary is Vary.BETA else spec.beta
                n = x if spec.vary is Vary.REFINEMENT else spec.n_cells
                tasks.append(("solution", (params, beta, n, scheme, spec.iteration)))
    return tasks


def run_sweep(spec: SweepSpec) -> SweepTable:
    """Evaluate every (grid point, scheme) pair and collect rows in grid order."""
    tasks = _tasks(spec)
    if spec.workers > 1:
        with ProcessPoolExecutor(max_workers=spec.workers) as pool:
            results = list(pool.map(_run_task, tasks))
    else:
        results = [_run_task(t) for t in tasks]

    if spec.vary is Vary.REFINEMENT:
        columns = REFINEMENT_COLUMNS
    elif spec.mode is Mode.CRITICAL:
        columns = (spec.vary.column,) + CRITICAL_COLUMNS
    else:
        columns = (spec.vary.column,) + SOLUTION_COLUMNS
    rows = []
    per_point = len(spec.schemes)
    for i, res in enumerate(results):
        res = dict(res)
        res[spec.vary.column] = spec.grid[i // per_point]
        rows.append(tuple(res.get(c) for c in columns))
    table = SweepTable(columns, rows, provenance=run_manifest(spec))
    table.verdicts = _verdicts(spec, table)
    return table


def _verdicts(spec: SweepSpec, table: SweepTable) -> dict[str, bool]:
    out = {}
    schemes = spec.schemes
    if spec.vary is Vary.BETA:
        for s in schemes:
            phases = table.column("phase", s)
            flips = sum(1 for p, q in zip(phases, phases[1:]) if p != q and None not in (p, q))
            starts_normal = not phases or phases[0] == Phase.NORMAL.value or flips == 0
            out[f"{s.label}:single_transition"] = flips <= 1 and starts_normal
            out[f"{s.label}:u_nondecreasing"] = check_trend(table.column("u", s), True, strict=False)
            out[f"{s.label}:v_nondecreasing"] = check_trend(table.column("v", s), True, strict=False)
    elif spec.vary is Vary.REFINEMENT:
        out.update(refinement_verdicts(table, tol=10 * spec.iteration.outer_tol))
    elif spec.mode is Mode.CRITICAL:
        increasing = spec.vary is Vary.COUPLING_K2
        word = "increasing" if increasing else "decreasing"
        for s in schemes:
            out[f"{s.label}:beta_c_{word}_in_{spec.vary.value}"] = check_trend(
                table.column("beta_c", s), increasing)
    elif CaseBranch.of(spec.base) is CaseBranch.REPULSION_DOMINANT:
        increasing = spec.vary is Vary.COUPLING_K2
        word = "nondecreasing" if increasing else "nonincreasing"
        for s in schemes:
            for c in ("u", "v"):
                out[f"{s.label}:{c}_{word}_in_{spec.vary.value}"] = check_trend(
                    table.column(c, s), increasing, strict=False)
    return out


def refinement_verdicts(table: SweepTable, tol: float = 1e-9) -> dict[str, bool]:
    out = {}
    mins = {c: table.column(c, SchemeKind.MIN_MIXED) for c in ("u", "v")}
    maxs = {c: table.column(c, SchemeKind.MAX_MIXED) for c in ("u", "v")}
    if mins["u"]:
        out["min-mixed:nondecreasing_in_n"] = all(
            check_trend(mins[c], True, strict=False, tol=tol) for c in ("u", "v"))
    if maxs["u"]:
        out["max-mixed:nonincreasing_in_n"] = all(
            check_trend(maxs[c], False, strict=False, tol=tol) for c in ("u", "v"))
    if mins["u"] and maxs["u"]:
        out["min_le_max"] = all(
            lo is not None and hi is not None and lo <= hi + tol
            for c in ("u", "v") for lo, hi in zip(mins[c], maxs[c]))
    return out


def sweep_beta(spec: SweepSpec) -> SweepTable:
    if spec.vary is not Vary.BETA:
        raise DomainError("sweep_beta needs vary=BETA")
    return run_sweep(spec)


def sweep_refinement(params: ModelParams, beta: float, n_list: Iterable[int],
                     schemes: Iterable[SchemeKind] = tuple(SchemeKind),
                     cfg: IterationConfig = IterationConfig()) -> SweepTable:
    spec = SweepSpec(Vary.REFINEMENT, tuple(n_list), params, beta=beta, schemes=tuple(schemes),
                     iteration=cfg)
    return run_sweep(spec)


def sweep_parameter(spec: SweepSpec) -> SweepTable:
    if spec.vary not in (Vary.CUTOFF_A, Vary.COUPLING_K2):
        raise DomainError("sweep_parameter varies a or k2")
    return run_sweep(spec)


def format_value(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, f".{CSV_DIGITS}g")
    return str(value)


def write_csv(table: SweepTable, destination) -> None:
    """Header plus one row per entry; 12 significant digits, LF line ends, UTF-8.

    ``destination`` is a path or an open text stream.
    """
    if hasattr(destination, "write"):
        _write_rows(table, destination)
        return
    path = os.fspath(destination)
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            _write_rows(table, fh)
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write CSV to {path}: {exc.strerror}", path) from exc


def _write_rows(table: SweepTable, fh) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(table.columns)
    for row in table.rows:
        writer.writerow([format_value(v) for v in row])


def csv_bytes(table: SweepTable) -> bytes:
    buf = io.StringIO()
    write_csv(table, buf)
    return buf.getvalue().encode("utf-8")


def _parse(text: str):
    if text == "":
        return None
    if text in ("true", "false"):
        return text == "true"
    for conv in (int, float):
        try:
            return conv(text)
        except ValueError:
            pass
    return text


def read_csv(source) -> tuple[tuple[str, ...], list[tuple]]:
    """Inverse of write_csv: returns (columns, rows) with numbers parsed."""
    if hasattr(source, "read"):
        text = source.read()
    else:
        with open(source, encoding="utf-8", newline="") as fh:
            text = fh.read()
    reader = csv.reader(io.StringIO(text))
    header = tuple(next(reader))
    return header, [tuple(_parse(x) for x in row) for row in reader]


def _iteration_dict(cfg: IterationConfig) -> dict:
    return {"outer_tol": cfg.outer_tol, "max_outer": cfg.max_outer,
            "positivity_eps": cfg.positivity_eps,
            "inner_abs_tol": cfg.inner.abs_tol, "inner_max_iter": cfg.inner.max_iter}


def run_manifest(spec: SweepSpec, tool_version: str | None = None,
                 timestamp: str | None = None, extra: dict | None = None) -> dict:
    """JSON-serialisable record of every input that determines the table."""
    from . import __version__

    record = {
        "tool": "btsgap",
        "tool_version": tool_version or __version__,
        "timestamp": timestamp,
        "vary": spec.vary.value,
        "mode": spec.mode.value,
        "grid": list(spec.grid),
        "params": spec.base.as_dict(),
        "branch": CaseBranch.of(spec.base).value,
        "beta": spec.beta,
        "n_cells": spec.n_cells,
        "schemes": [s.value for s in spec.schemes],
        "iteration": _iteration_dict(spec.iteration),
        "partition": "uniform, equal cell counts on [0,a] and [a,b]",
        "determinism": "no random numbers; output depends only on the fields above",
    }
    if spec.mode is Mode.CRITICAL:
        record["search"] = list(spec.search)
        record["tol"] = spec.tol
    if extra:
        record.update(extra)
    return record


def spec_from_manifest(record: dict) -> SweepSpec:
    it = record["iteration"]
    cfg = IterationConfig(outer_tol=it["outer_tol"], max_outer=it["max_outer"],
                          positivity_eps=it["positivity_eps"],
                          inner=SolveConfig(it["inner_abs_tol"], it["inner_max_iter"]))
    kwargs = {}
    if record["mode"] == Mode.CRITICAL.value:
        kwargs = {"search": tuple(record["search"]), "tol": record["tol"]}
    return SweepSpec(Vary(record["vary"]), tuple(record["grid"]), ModelParams(**record["params"]),
                     beta=record["beta"], n_cells=record["n_cells"],
                     schemes=tuple(SchemeKind(s) for s in record["schemes"]),
                     mode=Mode(record["mode"]), iteration=cfg, **kwargs)


def dump_manifest(record: dict, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(record, fh, indent=2, sort_keys=True)
        fh.write("\n")


def in_supersolution_box(table: SweepTable, params_of) -> bool:
    """Every superconducting row lies inside its supersolution box; params_of maps a row dict to params."""
    for row in table.as_dicts():
        if row.get("phase") != Phase.SUPERCONDUCTING.value:
            continue
        top = supersolution_bound(params_of(row))
        if not (row["u"] <= top.u and row["v"] <= top.v):
            return False
    return True
