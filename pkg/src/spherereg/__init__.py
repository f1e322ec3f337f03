"""Regression over unit vectors with provable approximation factors.

Candidate enumeration over small row subsets, general cost families
(l_p, powers, clipped residuals, trimmed outliers), unknown row matchings and
sensitivity-sampling coresets for compression and streaming.
"""
from .candidates import CandidateSet, calc_x_candidates, sign_normalize
from .coreset import Coreset, build_coreset, merge_reduce, merge_reduce_tree, sensitivity_bounds
from .cost import CostSpec, check_log_lipschitz, evaluate, lifted_factor
from .instance import RegressionInstance
from .matching import MatchResult, hungarian, match_solve
from .optset import OptResult, calc_opt
from .solver import SolveResult, solve, solve_with_outliers

__all__ = [
    "CandidateSet", "Coreset", "CostSpec", "MatchResult", "OptResult", "RegressionInstance", "SolveResult",
    "build_coreset", "calc_opt", "calc_x_candidates", "check_log_lipschitz", "evaluate", "hungarian",
    "lifted_factor", "match_solve", "merge_reduce", "merge_reduce_tree", "sensitivity_bounds",
    "sign_normalize", "solve", "solve_with_outliers",
]
