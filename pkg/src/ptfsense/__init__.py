"""Sensitivity of polynomial threshold functions.

Exact Boolean analysis (influences, average and noise sensitivity), Monte
Carlo estimators on Gaussian space, critical-index machinery, the
sensitivity reduction sampler and an L1-regression learner.
"""

__version__ = "0.1.0"

from ._backend import get_backend, set_backend
from .boolean import (
    PtfBoolean,
    as_bound_closed,
    as_bound_recursive,
    exact_as,
    exact_influence,
    exact_influences,
    exact_ns,
    influence_via_derivative,
    middle_layers_symmetric,
    ns_pair_enumeration,
)
from .critical import CriticalIndexReport, critical_index, decompose, tail_decay_check
from .gaussian import (
    estimate_gas,
    estimate_gi,
    estimate_gns,
    invariance_distance,
    perturbation_norm,
    sheppard,
)
from .hermite import HermiteExpansion, hermite_eval
from .learner import RegressionModel, choose_degree, evaluate, feature_map, l1_fit
from .poly import MultilinearPoly, Restriction, TruthTable, fourier_transform, restrict
from .reduction import reduction_estimate, replicate
from .rng import Estimate, set_threads, threads
from .suites import list_suites, run_suite

__all__ = [
    "CriticalIndexReport", "Estimate", "HermiteExpansion", "MultilinearPoly", "PtfBoolean",
    "RegressionModel", "Restriction", "TruthTable", "as_bound_closed", "as_bound_recursive",
    "choose_degree", "critical_index", "decompose", "estimate_gas", "estimate_gi",
    "estimate_gns", "evaluate", "exact_as", "exact_influence", "exact_influences", "exact_ns",
    "feature_map", "fourier_transform", "get_backend", "hermite_eval", "influence_via_derivative",
    "invariance_distance", "l1_fit", "list_suites", "middle_layers_symmetric",
    "ns_pair_enumeration", "perturbation_norm", "reduction_estimate", "replicate", "restrict",
    "run_suite", "set_backend", "set_threads", "sheppard", "tail_decay_check", "threads",
]
