"""Kernel function f_beta and the continuous gap transforms A_beta, B_beta.

The BTS interaction is piecewise constant: an attractive phonon part of
strength K1 supported on |x|, |y| < a and a repulsive Coulomb part of
strength K2 supported on |x|, |y| < b.  With the piecewise-constant gap
ansatz the whole model reduces to two scalar transforms

    A(delta) = delta * int_0^a f(sqrt(delta^2 + x^2)) dx
    B(delta) = delta * int_a^b f(sqrt(delta^2 + x^2)) dx

with f(t) = tanh(beta t / 2) / t.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import AccuracyError, DomainError

# Below this value of beta*t/2 the removable singularity of tanh(s)/s is
# replaced by its series; the truncation error there is O(s^4) ~ 1e-32.
SERIES_THRESHOLD = 1e-8


@dataclass(frozen=True)
class ModelParams:
    """Physical constants of the BTS kernel.

    a is the phonon cutoff (Debye energy), b > a the Coulomb cutoff, k1 the
    phonon coupling and k2 the Coulomb coupling.
    """

    a: float
    b: float
    k1: float
    k2: float

    def __post_init__(self):
        for name in ("a", "b", "k1", "k2"):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or not math.isfinite(value):
                raise DomainError(f"{name} must be a finite real, got {value!r}")
            object.__setattr__(self, name, float(value))
        if not 0.0 < self.a < self.b:
            raise DomainError(f"cutoffs must satisfy 0 < a < b, got a={self.a}, b={self.b}")
        if self.k1 <= 0.0 or self.k2 <= 0.0:
            raise DomainError(f"couplings must be positive, got k1={self.k1}, k2={self.k2}")

    @property
    def attractive(self) -> bool:
        """True when the phonon coupling dominates (K1 > K2)."""
        return self.k1 > self.k2

    def replace(self, **changes) -> "ModelParams":
        fields = {"a": self.a, "b": self.b, "k1": self.k1, "k2": self.k2}
        fields.update(changes)
        return ModelParams(**fields)

    def as_dict(self) -> dict:
        return {"a": self.a, "b": self.b, "k1": self.k1, "k2": self.k2}


@dataclass(frozen=True)
class QuadratureConfig:
    abs_tol: float = 1e-10
    max_subdivisions: int = 1_000_000

    def __post_init__(self):
        if not self.abs_tol > 0.0:
            raise DomainError("abs_tol must be positive")
        if self.max_subdivisions < 1:
            raise DomainError("max_subdivisions must be at least 1")


def check_beta(beta: float) -> float:
    """Validate an inverse temperature and return it as a float."""
    if not isinstance(beta, (int, float, np.floating)) or not math.isfinite(beta) or beta <= 0:
        raise DomainError(f"beta must be a positive finite real, got {beta!r}")
    return float(beta)


def f_beta(t: float, beta: float) -> float:
    """tanh(beta*t/2)/t, continued by its limit beta/2 at t = 0."""
    beta = check_beta(beta)
    if not math.isfinite(t) or t < 0:
        raise DomainError(f"t must be a nonnegative finite real, got {t!r}")
    s = 0.5 * beta * t
    if s < SERIES_THRESHOLD:
        return 0.5 * beta * (1.0 - s * s / 3.0)
    return math.tanh(s) / t


def f_beta_array(t: np.ndarray, beta: float) -> np.ndarray:
    """Vectorised f_beta for nonnegative arrays; no validation."""
    t = np.asarray(t, dtype=float)
    s = 0.5 * beta * t
    small = s < SERIES_THRESHOLD
    safe_t = np.where(small, 1.0, t)
    return np.where(small, 0.5 * beta * (1.0 - s * s / 3.0), np.tanh(s) / safe_t)


def kernel_integral(delta: float, lo: float, hi: float, beta: float,
                    quad: QuadratureConfig = QuadratureConfig()) -> float:
    """int_lo^hi f_beta(sqrt(delta^2 + x^2)) dx to absolute accuracy quad.abs_tol."""
    beta = check_beta(beta)
    if not math.isfinite(delta) or delta < 0:
        raise DomainError(f"delta must be nonnegative and finite, got {delta!r}")
    if not 0.0 <= lo <= hi:
        raise DomainError(f"integration range must satisfy 0 <= lo <= hi, got [{lo}, {hi}]")
    if lo == hi:
        return 0.0
    d2 = delta * delta

    def integrand(x):
        return f_beta(math.sqrt(d2 + x * x), beta)

    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            value, err = integrate.quad(integrand, lo, hi, epsabs=quad.abs_tol, epsrel=0.0,
                                        limit=quad.max_subdivisions)
        except integrate.IntegrationWarning as exc:
            raise AccuracyError(f"quadrature over [{lo}, {hi}] did not converge: {exc}",
                                float("nan")) from exc
    if err > quad.abs_tol:
        raise AccuracyError(f"quadrature over [{lo}, {hi}] missed abs_tol={quad.abs_tol}", err)
    return value


def _transform(delta: float, lo: float, hi: float, beta: float, quad: QuadratureConfig) -> float:
    if not math.isfinite(delta) or delta < 0:
        raise DomainError(f"delta must be nonnegative and finite, got {delta!r}")
    if delta == 0.0:
        check_beta(beta)
        return 0.0
    # the integral is scaled by delta afterwards, so tighten its target accordingly
    inner = QuadratureConfig(quad.abs_tol / max(delta, 1.0), quad.max_subdivisions)
    return delta * kernel_integral(delta, lo, hi, beta, inner)


def a_continuous(delta: float, params: ModelParams, beta: float,
                 quad: QuadratureConfig = QuadratureConfig()) -> float:
    """A_beta(delta) = delta * int_0^a f_beta(sqrt(delta^2 + x^2)) dx."""
    return _transform(delta, 0.0, params.a, beta, quad)


def b_continuous(delta: float, params: ModelParams, beta: float,
                 quad: QuadratureConfig = QuadratureConfig()) -> float:
    """B_beta(delta) = delta * int_a^b f_beta(sqrt(delta^2 + x^2)) dx."""
    return _transform(delta, params.a, params.b, beta, quad)


def a_zero_temperature(delta: float, a: float) -> float:
    """Closed form of A at beta = infinity: delta * arcsinh(a / delta)."""
    if not math.isfinite(delta) or delta <= 0:
        raise DomainError(f"delta must be positive, got {delta!r}")
    if not math.isfinite(a) or a < 0:
        raise DomainError(f"a must be nonnegative, got {a!r}")
    return delta * math.asinh(a / delta)


def b_zero_temperature(delta: float, a: float, b: float) -> float:
    """Closed form of B at beta = infinity: delta * (arcsinh(b/delta) - arcsinh(a/delta))."""
    if not 0 <= a <= b:
        raise DomainError(f"need 0 <= a <= b, got a={a}, b={b}")
    return a_zero_temperature(delta, b) - a_zero_temperature(delta, a)
