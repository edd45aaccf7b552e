"""Phase classification, critical-beta bisection, and the linearisation oracle."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ClassificationError, DomainError, SearchRangeError, UnsupportedBranchError
from .kernel_math import ModelParams, QuadratureConfig, a_continuous, b_continuous, check_beta, kernel_integral
from .schemes import (CaseBranch, GapPair, IterationConfig, IterationResult, Phase, SchemeKind,
                      SchemeParts, make_parts, solve, supersolution_bound)

DEFAULT_SEARCH = (1e-3, 100.0)


@dataclass(frozen=True)
class CriticalEstimate:
    beta_lo: float
    beta_hi: float
    beta_c: float
    scheme: SchemeKind
    n_cells: int
    tol: float
    probes: int = 0

    @property
    def tau_c(self) -> float:
        """Critical temperature 1/beta_c."""
        return 1.0 / self.beta_c

    @property
    def tau_bracket(self) -> tuple[float, float]:
        return 1.0 / self.beta_hi, 1.0 / self.beta_lo


@dataclass(frozen=True)
class OracleConfig:
    quad: QuadratureConfig = field(default_factory=lambda: QuadratureConfig(abs_tol=1e-12))
    beta_range: tuple[float, float] = (1e-3, 1e3)
    tol: float = 1e-12

    def __post_init__(self):
        lo, hi = self.beta_range
        if not (0 < lo < hi < math.inf) or self.tol <= 0:
            raise DomainError("oracle range must lie in (0, inf) and tol must be positive")


def classify(params: ModelParams, beta: float, n_cells: int | SchemeParts, scheme: SchemeKind,
             cfg: IterationConfig = IterationConfig()) -> IterationResult:
    """Solve the scheme in subsolution mode and return the full result."""
    parts = n_cells if isinstance(n_cells, SchemeParts) else make_parts(params, n_cells)
    result = solve(params, beta, parts, scheme, cfg, mode="subsolution")
    if not result.converged:
        raise ClassificationError(
            f"{scheme.label} iteration did not converge at beta={beta} in {cfg.max_outer} steps",
            partial=result)
    return result


def classify_phase(params: ModelParams, beta: float, n_cells: int | SchemeParts, scheme: SchemeKind,
                   cfg: IterationConfig = IterationConfig()) -> Phase:
    """Superconducting if the scheme has a positive solution at this beta, else Normal."""
    return classify(params, beta, n_cells, scheme, cfg).phase


def find_critical_beta(params: ModelParams, n_cells: int | SchemeParts, scheme: SchemeKind,
                       search: tuple[float, float] = DEFAULT_SEARCH, tol: float = 1e-3,
                       cfg: IterationConfig = IterationConfig(),
                       max_expansions: int = 3) -> CriticalEstimate:
    """Bisect the phase indicator over beta to relative bracket width tol.

    The set of superconducting beta values is a half line, so a single sign
    change is bracketed.  Each open end of the search interval is widened
    by a factor 10 at most ``max_expansions`` times.
    """
    parts = n_cells if isinstance(n_cells, SchemeParts) else make_parts(params, n_cells)
    n_label = parts.a_part.n
    lo, hi = (check_beta(x) for x in search)
    if lo >= hi or tol <= 0:
        raise DomainError(f"need search lo < hi and tol > 0, got {search}, tol={tol}")
    probes = 0

    def phase(beta):
        nonlocal probes
        probes += 1
        return classify_phase(params, beta, parts, scheme, cfg)

    for _ in range(max_expansions + 1):
        if phase(lo) is Phase.NORMAL:
            break
        lo /= 10.0
    else:
        raise SearchRangeError(f"{scheme.label}: superconducting down to beta={lo * 10:g}")
    for _ in range(max_expansions + 1):
        if phase(hi) is Phase.SUPERCONDUCTING:
            break
        hi *= 10.0
    else:
        raise SearchRangeError(f"{scheme.label}: normal up to beta={hi / 10:g}")

    while hi - lo > tol * 0.5 * (lo + hi):
        mid = math.sqrt(lo * hi)
        if phase(mid) is Phase.SUPERCONDUCTING:
            hi = mid
        else:
            lo = mid
    return CriticalEstimate(lo, hi, 0.5 * (lo + hi), scheme, n_label, tol, probes)


def _alpha_gamma(params: ModelParams, beta: float, quad: QuadratureConfig) -> tuple[float, float]:
    alpha = kernel_integral(0.0, 0.0, params.a, beta, quad)
    gamma = kernel_integral(0.0, params.a, params.b, beta, quad)
    return alpha, gamma


def linearized_gain(params: ModelParams, beta: float,
                    quad: QuadratureConfig = QuadratureConfig(abs_tol=1e-12)) -> float:
    """Loop gain of the continuous system linearised at (0, 0), attractive case.

    With alpha = int_0^a f(x) dx and gamma = int_a^b f(x) dx the gain is
    (K1-K2) alpha + K2^2 alpha gamma / (1 + K2 gamma); a positive solution
    branches off zero where it crosses 1.
    """
    if CaseBranch.of(params) is not CaseBranch.ATTRACTIVE:
        raise UnsupportedBranchError("the linearisation oracle is only defined for K1 > K2")
    beta = check_beta(beta)
    alpha, gamma = _alpha_gamma(params, beta, quad)
    k1, k2 = params.k1, params.k2
    return (k1 - k2) * alpha + k2 * k2 * alpha * gamma / (1.0 + k2 * gamma)


def critical_beta_oracle(params: ModelParams, oracle_cfg: OracleConfig = OracleConfig()) -> float:
    """Root of linearized_gain(beta) = 1 by geometric bisection."""
    lo, hi = oracle_cfg.beta_range

    def excess(beta):
        return linearized_gain(params, beta, oracle_cfg.quad) - 1.0

    if excess(lo) >= 0 or excess(hi) <= 0:
        raise SearchRangeError(f"gain does not cross 1 inside beta in [{lo:g}, {hi:g}]")
    while hi - lo > oracle_cfg.tol * hi:
        mid = math.sqrt(lo * hi)
        if mid <= lo or mid >= hi:
            break
        if excess(mid) < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class AmplitudeScan:
    """Diagnostic outcome of a brute-force scan of the continuous system."""

    sign_change_cells: int
    min_relative_defect: float
    at: GapPair


def amplitude_scan(params: ModelParams, beta: float, points: int = 40,
                   quad: QuadratureConfig = QuadratureConfig()) -> AmplitudeScan:
    """Look for positive solutions of the continuous system on a log grid.

    Evaluates both equations of the continuous system on a points x points
    grid spanning [1e-6, 1] times the supersolution box.  A grid cell where
    both defects change sign flags a candidate solution.  Diagnostic only:
    it works for either coupling regime but proves nothing.
    """
    beta = check_beta(beta)
    top = supersolution_bound(params)
    fr = np.geomspace(1e-6, 1.0, points)
    us, vs = top.u * fr, top.v * fr
    k1, k2 = params.k1, params.k2
    A = np.array([a_continuous(u, params, beta, quad) for u in us])
    B = np.array([b_continuous(v, params, beta, quad) for v in vs])
    # u = (K1-K2) A(u) + K2 B(v),  v + K2 B(v) = K2 A(u)
    e1 = us[:, None] - (k1 - k2) * A[:, None] - k2 * B[None, :]
    e2 = vs[None, :] + k2 * B[None, :] - k2 * A[:, None]
    rel = np.maximum(np.abs(e1) / us[:, None], np.abs(e2) / vs[None, :])
    i, j = np.unravel_index(np.argmin(rel), rel.shape)

    def changes(e):
        s = np.sign(e)
        return (s[:-1, :-1] * s[1:, 1:] <= 0) | (s[:-1, 1:] * s[1:, :-1] <= 0)

    flagged = int(np.count_nonzero(changes(e1) & changes(e2)))
    return AmplitudeScan(flagged, float(rel[i, j]), GapPair(us[i], vs[j]))
