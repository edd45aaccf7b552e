"""Scalar solvers for strictly increasing maps and greatest fixed points."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from .errors import BracketError, ConvergenceError, DomainError, SupersolutionError

ScalarMap = Callable[[float], float]


@dataclass(frozen=True)
class SolveConfig:
    abs_tol: float = 1e-12
    max_iter: int = 100_000

    def __post_init__(self):
        if not self.abs_tol > 0.0:
            raise DomainError("abs_tol must be positive")
        if self.max_iter < 1:
            raise DomainError("max_iter must be at least 1")


def _bisect_bracket(g: ScalarMap, target: float, lo: float, hi: float,
                    cfg: SolveConfig) -> tuple[float, float]:
    # Pure sign bisection stopped on width only.  Starting from a fixed
    # bracket this makes the returned point a monotone function of target,
    # which the monotone traces of the schemes rely on at round-off level.
    for _ in range(cfg.max_iter):
        if hi - lo <= cfg.abs_tol:
            return lo, hi
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            return lo, hi
        if g(mid) < target:
            lo = mid
        else:
            hi = mid
    raise ConvergenceError(f"bisection did not reach width {cfg.abs_tol} in {cfg.max_iter} steps")


def bisect_increasing(g: ScalarMap, target: float, hi: float, cfg: SolveConfig = SolveConfig(),
                      lo: float = 0.0) -> float:
    """Solve g(x) = target on [lo, hi] for a strictly increasing g.

    Raises BracketError unless g(lo) <= target <= g(hi).  When g(lo) equals
    the target, lo is returned as is.
    """
    if not (math.isfinite(target) and math.isfinite(lo) and math.isfinite(hi)) or hi < lo:
        raise DomainError(f"invalid bracket [{lo}, {hi}] or target {target}")
    g_lo = g(lo)
    if g_lo == target:
        return lo
    g_hi = g(hi)
    if not g_lo <= target <= g_hi:
        raise BracketError(f"target {target!r} outside [g(lo), g(hi)] = [{g_lo!r}, {g_hi!r}]")
    lo, hi = _bisect_bracket(g, target, lo, hi, cfg)
    return 0.5 * (lo + hi)


def greatest_fixed_point(r: ScalarMap, hi: float, cfg: SolveConfig = SolveConfig(),
                         orbit: list[float] | None = None) -> float:
    """Largest fixed point of an increasing map r on [0, hi] by descending iteration.

    hi must be a supersolution, r(hi) <= hi.  The orbit x0 = hi,
    x_{k+1} = r(x_k) is non-increasing and stops once a step is below
    cfg.abs_tol.  Pass a list as ``orbit`` to record the visited points.
    """
    x = float(hi)
    y = r(x)
    if y > x:
        raise SupersolutionError(f"r(hi) = {y!r} exceeds hi = {x!r}")
    if orbit is not None:
        orbit.append(x)
    for _ in range(cfg.max_iter):
        y = min(r(x), x)
        if orbit is not None:
            orbit.append(y)
        if x - y < cfg.abs_tol:
            return y
        x = y
    raise ConvergenceError(f"descending orbit did not settle in {cfg.max_iter} steps")


def greatest_fixed_point_scaled(gain: float, ratio: ScalarMap, offset: float, hi: float,
                                cfg: SolveConfig = SolveConfig()) -> float:
    """Largest solution in [0, hi] of x = gain * x * ratio(x) + offset.

    Same object as ``greatest_fixed_point`` for r(x) = gain*x*ratio(x) + offset,
    but found by bracketing.  Requires gain >= 0, offset >= 0 and ratio
    strictly decreasing.  Then H(x) = x * (1 - gain * ratio(x)) is negative
    below the turning point where gain*ratio = 1 and strictly increasing
    above it, so the greatest root of H(x) = offset is the unique root on
    the increasing branch.  The descending orbit needs O(1/(1 - r'))
    steps and stalls near a bifurcation; this needs O(log(hi/abs_tol)).
    """
    if gain < 0 or offset < 0:
        raise DomainError("gain and offset must be nonnegative")

    def h(x: float) -> float:
        return x * (1.0 - gain * ratio(x))

    if h(hi) < offset:
        raise SupersolutionError(f"x = {hi!r} is not a supersolution of x = r(x)")
    lo = 0.0
    if gain * ratio(0.0) > 1.0:
        # turning point: 1 - gain*ratio(x) crosses zero from below
        lo, _ = _bisect_bracket(lambda x: 1.0 - gain * ratio(x), 0.0, 0.0, hi, cfg)
    elif offset == 0.0:
        return 0.0
    lo, hi = _bisect_bracket(h, offset, lo, hi, cfg)
    return 0.5 * (lo + hi)
