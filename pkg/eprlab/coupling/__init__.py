from ..verification import VerificationReport
from .coupled import (
    COUPLING_EPS,
    CoupledPair,
    CouplingReport,
    coupling_check,
    coupling_drift,
    dissipativity_constants,
    gap_bound,
    simulate_coupled,
)
from .functions import REGISTRY, TestFunction, constant, gaussian, linear, resolve, sigmoid, tanh
from .harnack import HarnackGridReport, harnack_check, harnack_exponent, harnack_grid, terminal_states
from .ibp import IbpPaths, bismut_weight_increment, ibp_check, simulate_ibp_paths
from .moments import (
    exp_moment_check,
    gaussian_quadratic_moment,
    hill_tail_index,
    psi_exp_moment_check,
    quadratic_threshold,
)

__all__ = [
    "COUPLING_EPS",
    "CoupledPair",
    "CouplingReport",
    "HarnackGridReport",
    "IbpPaths",
    "REGISTRY",
    "TestFunction",
    "VerificationReport",
    "bismut_weight_increment",
    "constant",
    "coupling_check",
    "coupling_drift",
    "dissipativity_constants",
    "exp_moment_check",
    "gap_bound",
    "gaussian",
    "gaussian_quadratic_moment",
    "harnack_check",
    "harnack_exponent",
    "harnack_grid",
    "hill_tail_index",
    "ibp_check",
    "linear",
    "psi_exp_moment_check",
    "quadratic_threshold",
    "resolve",
    "sigmoid",
    "simulate_coupled",
    "simulate_ibp_paths",
    "tanh",
    "terminal_states",
]
