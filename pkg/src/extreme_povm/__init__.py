"""Extreme points of the convex set of finite-outcome POVMs.

Numerical extremality tests, rank-preserving constructions, a catalog of
feasible rank vectors, an exact square-packing solver and the synthesis of
extreme POVMs from symmetric packings.
"""
from .constructions import (
    add_rank1,
    delete_outcome,
    increase_rank,
    lift_dimension,
    multiply_ranks,
    pvm,
    rank1_chain,
    refine,
    trivial_povm,
)
from .dilation import NaimarkDilation, minimal_dilation
from .extremality import (
    ExtremalityVerdict,
    NonExtremeWitness,
    check_extreme_a,
    check_extreme_c,
    extract_witness,
    is_extreme,
)
from .operator_core import (
    DEFAULT,
    STRICT,
    Povm,
    Tolerances,
    conjugate_renormalize,
    spectral_decompose,
    tolerance_profile,
    validate_povm,
)
from .packing import Formation, Placement, brute_force_oracle, solve, solve_general, solve_symmetric
from .rank_catalog import (
    RankVector,
    Status,
    derive_feasible,
    enumerate_candidates,
    necessary_conditions,
    parse_vector,
)
from .search import SearchReport, random_povm, search_extreme
from .synthesis import synthesize, synthesize_vector

__version__ = "0.1.0"
