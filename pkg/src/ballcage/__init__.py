"""Real-number subset sum by farthest-point geometry over a cage of balls."""

from .geometry import (
    Ball,
    BallIntersection,
    DegenerateHyperplaneError,
    build_Q,
    h_rho,
    rho_bar,
    rho_delta,
)
from .innerpoint import Case, InnerPointResult, classify_case, minimize_h_minus_f
from .instance import (
    CandidateVerdict,
    DegenerateInstanceError,
    HPolytope,
    RsspInstance,
    build_center,
    build_polytope,
    check_remark_1,
    objective_value,
    verify_candidate,
)
from .levelset import levelset_polytope, r_hat, scale_construction, verify_scaling_identity
from .lp import (
    ContainmentReport,
    LpResult,
    LpStatus,
    lp_solve,
    polytope_contains,
    polytope_feasible,
    project_onto_polytope,
    sample_polytope,
)
from .oracle import brute_force, dp_feasible, farthest_vertex
from .solver import ConfigError, SolveOutcome, SolverConfig, bisect_R, solve

__version__ = "0.1.0"

__all__ = [
    "Ball",
    "BallIntersection",
    "CandidateVerdict",
    "Case",
    "ConfigError",
    "ContainmentReport",
    "DegenerateHyperplaneError",
    "DegenerateInstanceError",
    "HPolytope",
    "InnerPointResult",
    "LpResult",
    "LpStatus",
    "RsspInstance",
    "SolveOutcome",
    "SolverConfig",
    "bisect_R",
    "brute_force",
    "build_Q",
    "build_center",
    "build_polytope",
    "check_remark_1",
    "classify_case",
    "dp_feasible",
    "farthest_vertex",
    "h_rho",
    "levelset_polytope",
    "lp_solve",
    "minimize_h_minus_f",
    "objective_value",
    "polytope_contains",
    "polytope_feasible",
    "project_onto_polytope",
    "r_hat",
    "rho_bar",
    "rho_delta",
    "sample_polytope",
    "scale_construction",
    "solve",
    "verify_candidate",
    "verify_scaling_identity",
]
