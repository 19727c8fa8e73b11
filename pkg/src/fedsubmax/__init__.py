"""Federated maximization of decomposable monotone submodular functions."""

from .continuous import FedCGConfig, FedCGPlusConfig, fedcg_plus_run, fedcg_run
from .discrete import brute_force_opt, centralized_greedy, fed_discrete_greedy, importance_factors
from .errors import AggregationOverflow, ConfigError, FedSubmaxError, InputError, InvariantViolation, SizeError
from .matroid import OracleMatroid, PartitionMatroid, UniformMatroid, linear_maximize
from .multilinear import estimate_gradient, exact_extension, exact_gradient, sample_count
from .objectives import ClientPopulation, CoverageObjective, FacilityLocationObjective, coverage_population, facility_population
from .rounding import BaseDecomposition, swap_round

__version__ = "0.1.0"

__all__ = [
    "AggregationOverflow",
    "BaseDecomposition",
    "ClientPopulation",
    "ConfigError",
    "CoverageObjective",
    "FacilityLocationObjective",
    "FedCGConfig",
    "FedCGPlusConfig",
    "FedSubmaxError",
    "InputError",
    "InvariantViolation",
    "OracleMatroid",
    "PartitionMatroid",
    "SizeError",
    "UniformMatroid",
    "brute_force_opt",
    "centralized_greedy",
    "coverage_population",
    "estimate_gradient",
    "exact_extension",
    "exact_gradient",
    "facility_population",
    "fed_discrete_greedy",
    "fedcg_plus_run",
    "fedcg_run",
    "importance_factors",
    "linear_maximize",
    "sample_count",
    "swap_round",
]
