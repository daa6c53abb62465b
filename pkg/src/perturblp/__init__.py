"""Exact singularly perturbed linear programming and its MDP application."""

from .linalg import generic_rank_pencil, rank, rat, solve_linear
from .mdp import (
    Mdp,
    StationaryPolicy,
    blackwell_gap,
    build_average_lp,
    build_discounted_lp,
    build_perturbed_from_discounted,
    derive_limiting_lp,
    discounted_value,
    evaluate_policy,
    shift_rewards,
    verify_reduction,
)
from .perturbed import (
    PerturbedLp,
    Variant,
    build_limiting,
    check_assumptions,
    check_equivalence,
    check_es1,
    classify_bases,
    compute_j0,
    instantiate,
    slater_holds,
    sweep,
)
from .simplex import LpStandardForm, SolveResult, Status, enumerate_vertices, maximize_coordinate, solve

__version__ = "0.1.0"
