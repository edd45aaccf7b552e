"""Min-Mixed and Max-Mixed monotone iterations for the BTS two-gap system.

In the variables u = Delta_1 >= 0, v = -Delta_2 >= 0 the model reads

    u = (K1 - K2) A(u) + K2 B(v)
    v + K2 B(v) = K2 A(u)

Each scheme replaces A and B by lower or upper Riemann bounds.  Which
bound appears where is fixed by the scheme and by the coupling regime:

    Case I  (K1 > K2), bound kappa / kappa':
        u = (K1-K2) A^kappa(u) + K2 B^kappa(v)
        v + K2 B^kappa'(v) = K2 A^kappa(u)
    Case II (K1 <= K2):
        u + (K2-K1) A^kappa'(u) = K2 B^kappa(v)
        v + K2 B^kappa'(v) = K2 A^kappa(u)

with kappa = LOWER, kappa' = UPPER for Min-Mixed and the reverse for
Max-Mixed.  The iterations alternate a u-solve with v frozen and a v-solve
with the new u.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .discretization import BoundKind, Partition, a_discrete, b_discrete, bound_sum, uniform_partition
from .errors import DomainError
from .kernel_math import ModelParams, check_beta
from .monotone_solve import SolveConfig, bisect_increasing, greatest_fixed_point_scaled


class SchemeKind(enum.Enum):
    MIN_MIXED = "min"
    MAX_MIXED = "max"

    @property
    def primary(self) -> BoundKind:
        """Bound used on the driving side of both equations."""
        return BoundKind.LOWER if self is SchemeKind.MIN_MIXED else BoundKind.UPPER

    @property
    def secondary(self) -> BoundKind:
        """Bound used inside the monotone left-hand sides P_h, Q_h, J_h."""
        return self.primary.other

    @property
    def label(self) -> str:
        return "min-mixed" if self is SchemeKind.MIN_MIXED else "max-mixed"


class CaseBranch(enum.Enum):
    ATTRACTIVE = "attractive"
    REPULSION_DOMINANT = "repulsion-dominant"

    @classmethod
    def of(cls, params: ModelParams) -> "CaseBranch":
        return cls.ATTRACTIVE if params.k1 > params.k2 else cls.REPULSION_DOMINANT


class Phase(enum.Enum):
    SUPERCONDUCTING = "superconducting"
    NORMAL = "normal"


@dataclass(frozen=True, order=False)
class GapPair:
    """A point of the cone u >= 0, v >= 0; Delta_1 = u and Delta_2 = -v."""

    u: float
    v: float

    def __post_init__(self):
        if not (np.isfinite(self.u) and np.isfinite(self.v)) or self.u < 0 or self.v < 0:
            raise DomainError(f"gap pair must be nonnegative and finite, got ({self.u}, {self.v})")
        object.__setattr__(self, "u", float(self.u))
        object.__setattr__(self, "v", float(self.v))

    @property
    def delta1(self) -> float:
        return self.u

    @property
    def delta2(self) -> float:
        return 0.0 - self.v

    def is_zero(self) -> bool:
        return self.u == 0.0 and self.v == 0.0

    def leq(self, other: "GapPair", tol: float = 0.0) -> bool:
        """Componentwise order (u, v) <= (u', v') up to tol."""
        return self.u <= other.u + tol and self.v <= other.v + tol


ZERO = GapPair(0.0, 0.0)


class SchemeParts(NamedTuple):
    a_part: Partition
    b_part: Partition


def make_parts(params: ModelParams, n_a: int, n_b: int | None = None) -> SchemeParts:
    """Uniform partitions of [0, a] and [a, b]; n_b defaults to n_a."""
    return SchemeParts(uniform_partition(0.0, params.a, n_a),
                       uniform_partition(params.a, params.b, n_a if n_b is None else n_b))


@dataclass(frozen=True)
class IterationConfig:
    outer_tol: float = 1e-10
    inner: SolveConfig = SolveConfig()
    max_outer: int = 10_000
    positivity_eps: float = 1e-8

    def __post_init__(self):
        if not (self.outer_tol > 0 and self.positivity_eps > 0 and self.max_outer >= 1):
            raise DomainError("iteration tolerances and limits must be positive")


@dataclass(frozen=True)
class SubsolutionScan:
    """Logarithmic grid used to look for a Case II subsolution."""

    points_per_axis: int = 24
    lo_fraction: float = 1e-6
    hi_fraction: float = 1.0


@dataclass
class IterationResult:
    pair: GapPair
    phase: Phase
    iterations: int
    residual: tuple[float, float]
    trace: list[GapPair]
    converged: bool
    start: GapPair = ZERO
    # True when u - (K1-K2) A_h(u) was non-monotone for some solve (Case I only)
    h_nonmonotone: bool = False
    scheme: SchemeKind | None = None
    branch: CaseBranch | None = None


@dataclass
class _System:
    """The four transforms of one scheme at fixed (params, beta, parts)."""

    params: ModelParams
    beta: float
    parts: SchemeParts
    kind: SchemeKind
    branch: CaseBranch = field(init=False)

    def __post_init__(self):
        self.beta = check_beta(self.beta)
        p, (pa, pb) = self.params, self.parts
        if pa.lo != 0.0 or pa.hi != p.a or pb.lo != p.a or pb.hi != p.b:
            raise DomainError("partitions do not match the cutoffs a, b")
        self.branch = CaseBranch.of(p)

    def A(self, u: float, kind: BoundKind) -> float:
        return a_discrete(u, self.parts.a_part, self.beta, kind)

    def B(self, v: float, kind: BoundKind) -> float:
        return b_discrete(v, self.parts.b_part, self.beta, kind)

    def a_ratio(self, kind: BoundKind):
        part, beta = self.parts.a_part, self.beta
        return lambda u: bound_sum(u, part, beta, kind)

    def v_step(self, u: float, inner: SolveConfig) -> float:
        # v + K2 B^kappa'(v) = K2 A^kappa(u); the right side is at most K2*a,
        # and the left side reaches K2*a at v = K2*a.
        k2, kap, kap2 = self.params.k2, self.kind.primary, self.kind.secondary
        target = k2 * self.A(u, kap)
        return bisect_increasing(lambda v: v + k2 * self.B(v, kap2), target, k2 * self.params.a, inner)

    def equations(self, pair: GapPair) -> tuple[float, float]:
        """(lhs - rhs) of both scheme equations."""
        p, kap, kap2 = self.params, self.kind.primary, self.kind.secondary
        u, v = pair.u, pair.v
        if self.branch is CaseBranch.ATTRACTIVE:
            e1 = u - (p.k1 - p.k2) * self.A(u, kap) - p.k2 * self.B(v, kap)
        else:
            e1 = u + (p.k2 - p.k1) * self.A(u, kap2) - p.k2 * self.B(v, kap)
        e2 = v + p.k2 * self.B(v, kap2) - p.k2 * self.A(u, kap)
        return e1, e2


def supersolution_bound(params: ModelParams) -> GapPair:
    """Componentwise upper bound for every solution, from A_h <= a and B_h <= b - a."""
    a, b, k1, k2 = params.a, params.b, params.k1, params.k2
    if CaseBranch.of(params) is CaseBranch.ATTRACTIVE:
        return GapPair((k1 - k2) * a + k2 * (b - a), k2 * a)
    return GapPair(k2 * (b - a), k2 * a)


def subsolution_case1(params: ModelParams, beta: float, parts: SchemeParts, kind: SchemeKind,
                      cfg: IterationConfig = IterationConfig()) -> GapPair | None:
    """(u0, 0) with u0 the greatest root of u = (K1-K2) A_h(u), or None if u0 <= eps."""
    if CaseBranch.of(params) is not CaseBranch.ATTRACTIVE:
        raise DomainError("subsolution_case1 needs K1 > K2")
    system = _System(params, beta, parts, kind)
    hi = supersolution_bound(params).u
    u0 = greatest_fixed_point_scaled(params.k1 - params.k2, system.a_ratio(kind.primary), 0.0, hi,
                                     cfg.inner)
    if u0 <= cfg.positivity_eps:
        return None
    return GapPair(u0, 0.0)


def subsolution_case2(params: ModelParams, beta: float, parts: SchemeParts,
                      scan: SubsolutionScan = SubsolutionScan(),
                      cfg: IterationConfig = IterationConfig()) -> GapPair | None:
    """First grid pair satisfying the Min-Mixed Case II subsolution inequalities.

    A Min-Mixed subsolution is also one for Max-Mixed, so one scan serves
    both schemes.  The grid is scanned with u outermost, both ascending.
    """
    if CaseBranch.of(params) is not CaseBranch.REPULSION_DOMINANT:
        raise DomainError("subsolution_case2 needs K1 <= K2")
    system = _System(params, beta, parts, SchemeKind.MIN_MIXED)
    top = supersolution_bound(params)
    fractions = np.geomspace(scan.lo_fraction, scan.hi_fraction, scan.points_per_axis)
    us, vs = top.u * fractions, top.v * fractions
    k1, k2 = params.k1, params.k2
    lower, upper = BoundKind.LOWER, BoundKind.UPPER
    # u0 + (K2-K1) A^U(u0) <= K2 B^L(v0)  and  v0 + K2 B^U(v0) <= K2 A^L(u0)
    lhs1 = np.array([u + (k2 - k1) * system.A(u, upper) for u in us])
    rhs2 = np.array([k2 * system.A(u, lower) for u in us])
    rhs1 = np.array([k2 * system.B(v, lower) for v in vs])
    lhs2 = np.array([v + k2 * system.B(v, upper) for v in vs])
    ok = (lhs1[:, None] <= rhs1[None, :]) & (lhs2[None, :] <= rhs2[:, None])
    hits = np.argwhere(ok)
    if hits.size == 0:
        return None
    i, j = hits[0]
    return GapPair(us[i], vs[j])


def _iterate(system: _System, start: GapPair, cfg: IterationConfig) -> IterationResult:
    p = system.params
    kap, kap2 = system.kind.primary, system.kind.secondary
    top = supersolution_bound(p)
    trace = [start]
    nonmono = False
    if system.branch is CaseBranch.ATTRACTIVE:
        gain = p.k1 - p.k2
        ratio = system.a_ratio(kap)
        nonmono = gain * ratio(0.0) > 1.0

        def u_step(v):
            return greatest_fixed_point_scaled(gain, ratio, p.k2 * system.B(v, kap), top.u, cfg.inner)
    else:
        def u_step(v):
            target = p.k2 * system.B(v, kap)
            return bisect_increasing(lambda u: u + (p.k2 - p.k1) * system.A(u, kap2), target,
                                     top.u, cfg.inner)

    u, v = start.u, start.v
    converged = False
    n = 0
    if start.is_zero():
        # (0, 0) solves every scheme exactly; the u-solve alone would jump
        # to the scalar root when it exists, so the zero pair is kept.
        converged = True
    else:
        while n < cfg.max_outer:
            n += 1
            u_new = u_step(v)
            v_new = system.v_step(u_new, cfg.inner)
            trace.append(GapPair(u_new, v_new))
            change = max(abs(u_new - u), abs(v_new - v))
            u, v = u_new, v_new
            if change < cfg.outer_tol:
                converged = True
                break

    final = GapPair(u, v)
    if u > cfg.positivity_eps and v > cfg.positivity_eps:
        phase = Phase.SUPERCONDUCTING
    else:
        phase = Phase.NORMAL
        if converged:
            final = ZERO
    e1, e2 = system.equations(final)
    return IterationResult(pair=final, phase=phase, iterations=n, residual=(abs(e1), abs(e2)),
                           trace=trace, converged=converged, start=start, h_nonmonotone=nonmono,
                           scheme=system.kind, branch=system.branch)


def iterate_case1(params: ModelParams, beta: float, parts: SchemeParts, kind: SchemeKind,
                  start: GapPair, cfg: IterationConfig = IterationConfig()) -> IterationResult:
    """Run the Case I alternation from ``start`` (a subsolution, the zero pair, or the supersolution)."""
    system = _System(params, beta, parts, kind)
    if system.branch is not CaseBranch.ATTRACTIVE:
        raise DomainError("iterate_case1 needs K1 > K2")
    return _iterate(system, start, cfg)


def iterate_case2(params: ModelParams, beta: float, parts: SchemeParts, kind: SchemeKind,
                  start: GapPair, cfg: IterationConfig = IterationConfig()) -> IterationResult:
    """Run the Case II alternation (P_h and Q_h inverted by bisection)."""
    system = _System(params, beta, parts, kind)
    if system.branch is not CaseBranch.REPULSION_DOMINANT:
        raise DomainError("iterate_case2 needs K1 <= K2")
    return _iterate(system, start, cfg)


def residual(pair: GapPair, params: ModelParams, beta: float, parts: SchemeParts, kind: SchemeKind,
             branch: CaseBranch | None = None) -> tuple[float, float]:
    """Absolute defects of both scheme equations at ``pair``."""
    if branch is not None and branch is not CaseBranch.of(params):
        raise DomainError(f"branch {branch.value} does not match the couplings")
    e1, e2 = _System(params, beta, parts, kind).equations(pair)
    return abs(e1), abs(e2)


def solve(params: ModelParams, beta: float, parts: SchemeParts, kind: SchemeKind,
          cfg: IterationConfig = IterationConfig(), mode: str = "subsolution",
          scan: SubsolutionScan = SubsolutionScan()) -> IterationResult:
    """Solve one scheme at fixed beta.

    mode="subsolution" starts from the constructed subsolution (or the zero
    pair if none exists) and climbs; in Case II a failed scan falls back to
    descent.  mode="descent" starts from the supersolution pair and reports
    the greatest solution.
    """
    branch = CaseBranch.of(params)
    run = iterate_case1 if branch is CaseBranch.ATTRACTIVE else iterate_case2
    if mode == "descent":
        return run(params, beta, parts, kind, supersolution_bound(params), cfg)
    if mode != "subsolution":
        raise DomainError(f"unknown mode {mode!r}")
    if branch is CaseBranch.ATTRACTIVE:
        start = subsolution_case1(params, beta, parts, kind, cfg)
        return run(params, beta, parts, kind, start or ZERO, cfg)
    start = subsolution_case2(params, beta, parts, scan, cfg)
    if start is None:
        return run(params, beta, parts, kind, supersolution_bound(params), cfg)
    return run(params, beta, parts, kind, start, cfg)
