"""Farthest-point maximization over ball intersections, and its reductions.

The package turns the nonconvex problem max ||x - C||^2 over an
intersection of balls into convex subproblems three different ways
(certificate bisection, boundary identification, polytope inclusion) and
layers a zero-sum-subset decision procedure on top of a disk-cover
construction whose corners encode subset sums.
"""

from . import _kernels
from .convex_solver import (LPResult, SolverFailure, SolveReport,
                            lp_feasible_strict, lp_max,
                            minimize_unconstrained, minimize_with_level,
                            polytope_empty)
from .geometry import (Ball, FrameworkConfig, InstanceError,
                       PiecewiseMaxFunction, Polytope, QuadraticPiece,
                       build_g, build_h_from_balls, eval_piecewise,
                       h_minus_f_pieces, polytope_family, single_quadratic,
                       subgradient)
from .maximize import (CaseLabel, CertificateResult, PreconditionError,
                       bisection_max, classify_case, default_upper_bound,
                       farthest_point, linear_perturbation_max,
                       reach_certificate, separating_hyperplane)
from .oracles import (CoaxialDiskFamily, brute_force_subset_sum, grid_min,
                      inclusion_sampler, polytope_distance_bound,
                      sample_farthest)
from .radius_search import (InclusionNeverHolds, RStarReport,
                            polytope_inclusion, r_bar, r_star_boundary_case,
                            r_star_inclusion)
from .subset_sum import (DecisionReport, DiskCover, SubsetSumInstance,
                         build_disk_cover, build_search_polytope,
                         corner_exactness_check, cover_parameters,
                         decide_subset_sum, estimate_rho_bar, hat_R,
                         rho_for_delta, round_to_vertex,
                         scaled_polytope_equivalence)

__version__ = "0.1.0"

implementation = _kernels.IMPLEMENTATION

__all__ = [
    "Ball", "CaseLabel", "CertificateResult", "CoaxialDiskFamily",
    "DecisionReport", "DiskCover", "FrameworkConfig", "InclusionNeverHolds",
    "InstanceError", "LPResult", "PiecewiseMaxFunction", "Polytope",
    "PreconditionError", "QuadraticPiece", "RStarReport", "SolveReport",
    "SolverFailure", "SubsetSumInstance", "bisection_max",
    "brute_force_subset_sum", "build_disk_cover", "build_g",
    "build_h_from_balls", "build_search_polytope", "classify_case",
    "corner_exactness_check", "cover_parameters", "decide_subset_sum",
    "default_upper_bound", "estimate_rho_bar", "eval_piecewise",
    "farthest_point", "grid_min", "h_minus_f_pieces", "hat_R",
    "implementation", "inclusion_sampler", "linear_perturbation_max",
    "lp_feasible_strict", "lp_max", "minimize_unconstrained",
    "minimize_with_level", "polytope_distance_bound", "polytope_empty",
    "polytope_family", "polytope_inclusion", "r_bar",
    "r_star_boundary_case", "r_star_inclusion", "reach_certificate",
    "rho_for_delta", "round_to_vertex", "sample_farthest",
    "scaled_polytope_equivalence", "separating_hyperplane",
    "single_quadratic", "subgradient",
]
