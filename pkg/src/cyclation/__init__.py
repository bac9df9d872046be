"""Cycle structure of random cyclations: exact counts, samplers, the z-model and constants."""
from .exact import (
    CycleType,
    ExactDistributions,
    ExactPmf,
    ResourceCapError,
    cyc_class_size,
    cyclation_count,
    enumerate_cycle_types,
    exact_distributions,
    odd_double_factorial,
    perm_class_size,
    single_cycle_prob,
    stirling_first,
)
from .sampling import (
    Pairing,
    batch_stats,
    cycle_type_of,
    cycles_of,
    delete_interval,
    insert_interval,
    sample_cyclation,
)
from .special import constants, expint_E, harmonic
from .zmodel import ZParams, ex_extreme_z, extreme_pmf_z, nu_pmf, sample_z, solve_xl

__version__ = "0.1.0"

__all__ = [
    "CycleType", "ExactDistributions", "ExactPmf", "ResourceCapError", "cyc_class_size",
    "cyclation_count", "enumerate_cycle_types", "exact_distributions", "odd_double_factorial",
    "perm_class_size", "single_cycle_prob", "stirling_first", "Pairing", "batch_stats",
    "cycle_type_of", "cycles_of", "delete_interval", "insert_interval", "sample_cyclation",
    "constants", "expint_E", "harmonic", "ZParams", "ex_extreme_z", "extreme_pmf_z", "nu_pmf",
    "sample_z", "solve_xl", "__version__",
]
