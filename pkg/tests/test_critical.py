import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from btsgap import (ModelParams, OracleConfig, Phase, SchemeKind, amplitude_scan, classify_phase,
                    critical_beta_oracle, find_critical_beta, linearized_gain, make_parts)
from btsgap.critical import CriticalEstimate, _alpha_gamma, classify
from btsgap.errors import ClassificationError, DomainError, SearchRangeError, UnsupportedBranchError
from btsgap.kernel_math import QuadratureConfig
from btsgap.schemes import IterationConfig
from conftest import CASE1, CASE2, CASE2_STRONG

MIN, MAX = SchemeKind.MIN_MIXED, SchemeKind.MAX_MIXED

# roots of the linearised gain = 1, mpmath at 30 digits with its own quadrature
BETA_LIN = 1.0844801717609989
BETA_LIN_A11 = 0.98621862899537422
BETA_LIN_K203 = 1.2068672591881491


@pytest.fixture(scope="module")
def estimates():
    parts = make_parts(CASE1, 50)
    return {k: find_critical_beta(CASE1, parts, k) for k in (MIN, MAX)}


def test_classify_examples():
    assert classify_phase(CASE1, 6.0, 50, MIN) is Phase.SUPERCONDUCTING
    assert classify_phase(CASE1, 0.01, 50, MIN) is Phase.NORMAL
    assert classify_phase(CASE2_STRONG, 80.0, 50, MIN) is Phase.SUPERCONDUCTING


@pytest.mark.xfail(strict=True, reason="K2^2*alpha*gamma < 1 at these couplings rules out positive pairs")
def test_classify_weak_case2_beta5():
    assert classify_phase(CASE2, 5.0, 50, MIN) is Phase.SUPERCONDUCTING


def test_classify_raises_on_non_convergence():
    cfg = IterationConfig(max_outer=1, outer_tol=1e-15)
    with pytest.raises(ClassificationError) as info:
        classify(CASE1, 6.0, 50, MIN, cfg)
    assert info.value.partial is not None and not info.value.partial.converged


def test_estimate_invariants(estimates):
    parts = make_parts(CASE1, 50)
    for kind, est in estimates.items():
        assert est.scheme is kind and est.n_cells == 50
        assert est.beta_lo < est.beta_c <= est.beta_hi
        assert est.beta_hi - est.beta_lo <= est.tol * max(1.0, est.beta_c)
        assert classify_phase(CASE1, est.beta_lo, parts, kind) is Phase.NORMAL
        assert classify_phase(CASE1, est.beta_hi, parts, kind) is Phase.SUPERCONDUCTING
        # fresh probes either side of the estimate
        assert classify_phase(CASE1, est.beta_c * (1 + 2 * est.tol), 50, kind) is Phase.SUPERCONDUCTING
        assert classify_phase(CASE1, est.beta_c * (1 - 2 * est.tol), 50, kind) is Phase.NORMAL
        assert est.tau_c == pytest.approx(1 / est.beta_c)
        lo, hi = est.tau_bracket
        assert lo < est.tau_c < hi


def test_max_below_min(estimates):
    assert estimates[MAX].beta_c <= estimates[MIN].beta_c + 2 * 1e-3


def test_larger_cutoff_lowers_estimate(estimates):
    est = find_critical_beta(CASE1.replace(a=1.1), 50, MIN)
    assert est.beta_c < estimates[MIN].beta_c


def test_search_expansion_and_failure():
    est = find_critical_beta(CASE1, 50, MIN, search=(3.0, 6.0))
    assert est.beta_c == pytest.approx(1.087, rel=2e-3)
    with pytest.raises(SearchRangeError):
        find_critical_beta(CASE1, 50, MIN, search=(3.0, 6.0), max_expansions=0)
    with pytest.raises(SearchRangeError):
        find_critical_beta(CASE1, 50, MIN, search=(1e-3, 0.01), max_expansions=1)
    with pytest.raises(DomainError):
        find_critical_beta(CASE1, 50, MIN, search=(2.0, 1.0))
    with pytest.raises(DomainError):
        find_critical_beta(CASE1, 50, MIN, tol=0.0)


def test_oracle_reference_values():
    assert critical_beta_oracle(CASE1) == pytest.approx(BETA_LIN, rel=1e-10)
    assert critical_beta_oracle(CASE1.replace(a=1.1)) == pytest.approx(BETA_LIN_A11, rel=1e-10)
    assert critical_beta_oracle(CASE1.replace(k2=0.3)) == pytest.approx(BETA_LIN_K203, rel=1e-10)
    assert linearized_gain(CASE1, BETA_LIN) == pytest.approx(1.0, abs=1e-11)


def test_oracle_restrictions():
    with pytest.raises(UnsupportedBranchError):
        linearized_gain(CASE2, 5.0)
    with pytest.raises(UnsupportedBranchError):
        critical_beta_oracle(CASE2)
    with pytest.raises(SearchRangeError):
        critical_beta_oracle(CASE1, OracleConfig(beta_range=(2.0, 10.0)))
    with pytest.raises(DomainError):
        OracleConfig(beta_range=(0.0, 1.0))


def test_gain_increasing_and_limits():
    betas = np.geomspace(1e-3, 1e3, 25)
    g = [linearized_gain(CASE1, b) for b in betas]
    assert all(y > x for x, y in zip(g, g[1:]))
    assert linearized_gain(CASE1, 1e-8) < 1e-7
    weak = CASE1.replace(k2=1e-9)
    alpha, _ = _alpha_gamma(weak, 2.0, QuadratureConfig(1e-12))
    assert linearized_gain(weak, 2.0) == pytest.approx(weak.k1 * alpha, rel=1e-8)


@settings(max_examples=20, deadline=None)
@given(st.floats(0.2, 1.4), st.floats(1.1, 4.0), st.floats(0.01, 0.9))
def test_gain_is_factored_form(a, k1, frac):
    # (K1-K2) alpha + K2^2 alpha gamma/(1+K2 gamma) = alpha (K1 - K2/(1+K2 gamma))
    p = ModelParams(a, 1.5, k1, frac * k1)
    alpha, gamma = _alpha_gamma(p, 3.0, QuadratureConfig(1e-12))
    expect = alpha * (p.k1 - p.k2 / (1 + p.k2 * gamma))
    assert linearized_gain(p, 3.0) == pytest.approx(expect, rel=1e-12)


def test_amplitude_scan_diagnostic():
    assert amplitude_scan(CASE2_STRONG, 80.0, points=30).sign_change_cells > 0
    assert amplitude_scan(CASE2, 5.0, points=30).sign_change_cells == 0
    assert amplitude_scan(CASE1, 0.5, points=30).sign_change_cells == 0


def test_estimate_accessors():
    est = CriticalEstimate(1.0, 2.0, 1.5, MIN, 50, 1e-3)
    assert est.tau_c == pytest.approx(2 / 3)
    assert est.tau_bracket == (0.5, 1.0)
