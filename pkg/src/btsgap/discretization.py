"""Partitions and the lower/upper Riemann-bound transforms A_h, B_h.

On each closed cell the factor f_beta(sqrt(u^2 + x^2)) is decreasing in x,
so its minimum sits at the right endpoint and its maximum at the left one.
Both bounds are therefore evaluated exactly, never by searching the cell.
"""

from __future__ import annotations

import enum
import math
from typing import Iterator

import numpy as np

from .errors import DomainError
from .kernel_math import ModelParams, check_beta, f_beta, f_beta_array


class BoundKind(enum.Enum):
    LOWER = "lower"
    UPPER = "upper"

    @property
    def other(self) -> "BoundKind":
        return BoundKind.UPPER if self is BoundKind.LOWER else BoundKind.LOWER


class Partition:
    """Contiguous closed cells [x_0, x_1], ..., [x_{n-1}, x_n] covering [lo, hi]."""

    __slots__ = ("_edges", "_sq_left", "_sq_right", "_widths")

    def __init__(self, edges):
        edges = np.array(edges, dtype=float)
        if edges.ndim != 1 or edges.size < 2:
            raise DomainError("a partition needs at least two edges")
        if not np.all(np.isfinite(edges)):
            raise DomainError("partition edges must be finite")
        widths = np.diff(edges)
        if np.any(widths <= 0):
            raise DomainError("partition edges must be strictly increasing")
        edges.setflags(write=False)
        widths.setflags(write=False)
        self._edges = edges
        self._widths = widths
        self._sq_left = edges[:-1] ** 2
        self._sq_right = edges[1:] ** 2

    @property
    def edges(self) -> np.ndarray:
        return self._edges

    @property
    def lo(self) -> float:
        return float(self._edges[0])

    @property
    def hi(self) -> float:
        return float(self._edges[-1])

    @property
    def n(self) -> int:
        return self._widths.size

    @property
    def widths(self) -> np.ndarray:
        return self._widths

    @property
    def cells(self) -> list[tuple[float, float]]:
        return [(float(x0), float(x1)) for x0, x1 in zip(self._edges[:-1], self._edges[1:])]

    def __iter__(self) -> Iterator[tuple[float, float]]:
        return iter(self.cells)

    def __len__(self) -> int:
        return self.n

    def __eq__(self, other) -> bool:
        return isinstance(other, Partition) and np.array_equal(self._edges, other._edges)

    def __hash__(self) -> int:
        return hash(self._edges.tobytes())

    def __repr__(self) -> str:
        return f"Partition(lo={self.lo}, hi={self.hi}, n={self.n})"

    def refines(self, coarse: "Partition") -> bool:
        """Every cell of self lies inside a cell of coarse (same span, edges superset)."""
        if self.lo != coarse.lo or self.hi != coarse.hi:
            return False
        mine = set(self._edges.tolist())
        return all(x in mine for x in coarse._edges.tolist())

    def squared_endpoints(self, kind: BoundKind) -> np.ndarray:
        """x^2 at the endpoint where the cell bound of the given kind is attained."""
        return self._sq_right if kind is BoundKind.LOWER else self._sq_left


def uniform_partition(lo: float, hi: float, n: int) -> Partition:
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise DomainError(f"cell count must be a positive integer, got {n!r}")
    if not (math.isfinite(lo) and math.isfinite(hi)) or lo >= hi:
        raise DomainError(f"need finite lo < hi, got [{lo}, {hi}]")
    edges = np.linspace(lo, hi, int(n) + 1)
    edges[0], edges[-1] = lo, hi
    return Partition(edges)


def cell_bound(u: float, cell: tuple[float, float], beta: float, kind: BoundKind) -> float:
    """min (LOWER) or max (UPPER) of f_beta(sqrt(u^2 + x^2)) over the closed cell."""
    x_lo, x_hi = cell
    if not (0 <= x_lo <= x_hi) or not math.isfinite(x_hi):
        raise DomainError(f"cell must lie in [0, inf), got {cell!r}")
    if not math.isfinite(u) or u < 0:
        raise DomainError(f"u must be nonnegative and finite, got {u!r}")
    x = x_hi if kind is BoundKind.LOWER else x_lo
    return f_beta(math.sqrt(u * u + x * x), beta)


def bound_sum(u: float, part: Partition, beta: float, kind: BoundKind) -> float:
    """sum_k bound_k(u) |I_k|, i.e. A_h(u)/u; finite and positive at u = 0 too."""
    vals = f_beta_array(np.sqrt(u * u + part.squared_endpoints(kind)), beta)
    return float(np.dot(vals, part.widths))


def _check_args(u: float, beta: float) -> None:
    if not math.isfinite(u) or u < 0:
        raise DomainError(f"argument must be nonnegative and finite, got {u!r}")
    check_beta(beta)


def a_discrete(u: float, part: Partition, beta: float, kind: BoundKind,
               params: ModelParams | None = None) -> float:
    """A_h(u) = u * sum_k bound_k |I_k| over a partition of [0, a]."""
    _check_args(u, beta)
    if part.lo != 0.0:
        raise DomainError(f"A_h needs a partition of [0, a], got one starting at {part.lo}")
    if params is not None and part.hi != params.a:
        raise DomainError(f"partition ends at {part.hi}, expected a={params.a}")
    if u == 0.0:
        return 0.0
    return u * bound_sum(u, part, beta, kind)


def b_discrete(v: float, part: Partition, beta: float, kind: BoundKind,
               params: ModelParams | None = None) -> float:
    """B_h(v) = v * sum_k bound_k |I'_k| over a partition of [a, b]."""
    _check_args(v, beta)
    if part.lo <= 0.0:
        raise DomainError(f"B_h needs a partition of [a, b] with a > 0, got lo={part.lo}")
    if params is not None and (part.lo != params.a or part.hi != params.b):
        raise DomainError(f"partition spans [{part.lo}, {part.hi}], expected [{params.a}, {params.b}]")
    if v == 0.0:
        return 0.0
    return v * bound_sum(v, part, beta, kind)
