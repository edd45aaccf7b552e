"""Monotone Min-Mixed / Max-Mixed schemes for the BTS two-gap model."""

__version__ = "0.1.0"

from .critical import (CriticalEstimate, OracleConfig, amplitude_scan, classify_phase,
                       critical_beta_oracle, find_critical_beta, linearized_gain)
from .discretization import BoundKind, Partition, a_discrete, b_discrete, cell_bound, uniform_partition
from .kernel_math import (ModelParams, QuadratureConfig, a_continuous, a_zero_temperature,
                          b_continuous, f_beta)
from .monotone_solve import SolveConfig, bisect_increasing, greatest_fixed_point
from .schemes import (CaseBranch, GapPair, IterationConfig, IterationResult, Phase, SchemeKind,
                      iterate_case1, iterate_case2, make_parts, residual, solve,
                      subsolution_case1, subsolution_case2, supersolution_bound)

__all__ = [
    "BoundKind", "CaseBranch", "CriticalEstimate", "GapPair", "IterationConfig", "IterationResult",
    "ModelParams", "OracleConfig", "Partition", "Phase", "QuadratureConfig", "SchemeKind",
    "SolveConfig", "a_continuous", "a_discrete", "a_zero_temperature", "amplitude_scan",
    "b_continuous", "b_discrete", "bisect_increasing", "cell_bound", "classify_phase",
    "critical_beta_oracle", "f_beta", "find_critical_beta", "greatest_fixed_point",
    "iterate_case1", "iterate_case2", "linearized_gain", "make_parts", "residual", "solve",
    "subsolution_case1", "subsolution_case2", "supersolution_bound", "uniform_partition",
]
