"""Explicit solutions and value-function gradients for strictly convex
multi-parametric quadratic programs

    V(x) = min_z 1/2 z'Hz  subject to  G z <= W + S x.
"""

from .checks import CheckReport, CheckStatus, licq_everywhere, licq_status, run_checks
from .errors import (
    MpqpError,
    DimensionMismatch,
    NotSymmetric,
    NotPositiveDefinite,
    ParseError,
    DegenerateRow,
    Infeasible,
    Unbounded,
    MaxIterations,
    InfeasibleParameter,
    LicqViolated,
    SingularGram,
    EmptyRegion,
    PointNotInRegion,
    BoundaryPoint,
    OutsideFeasibleSet,
    NoSharedBoundary,
    InconsistentActiveSet,
)
from .explicit import (
    AffineMap,
    Containment,
    CriticalRegion,
    ExplicitSolution,
    QuadraticForm,
    enumerate_regions,
    load_solution,
    locate,
    neighbors,
    save_solution,
)
from .gradient import (
    BoundaryWarning,
    GradientResult,
    Route,
    check_gradient_continuity,
    finite_difference_gradient,
    gradient_from_multipliers,
    gradient_generic,
    gradient_region_closed_form,
    value_gradient,
)
from .linalg import cholesky_solve, cholesky_spd, row_rank, solve_spd
from .lp import Polyhedron, chebyshev_center, simplex_solve
from .oracle import KktResiduals, PrimalDualSolution, Status, kkt_residuals, solve_dual_qp, solve_qp, value_at
from .problem import (
    GenericProblemHooks,
    MpqpProblem,
    load_problem,
    mpqp_hooks,
    random_problem,
    save_problem,
    validate,
)

__version__ = "0.1.0"

__all__ = [
    "AffineMap",
    "BoundaryPoint",
    "BoundaryWarning",
    "chebyshev_center",
    "check_gradient_continuity",
    "CheckReport",
    "CheckStatus",
    "cholesky_solve",
    "cholesky_spd",
    "Containment",
    "CriticalRegion",
    "DegenerateRow",
    "DimensionMismatch",
    "EmptyRegion",
    "enumerate_regions",
    "ExplicitSolution",
    "finite_difference_gradient",
    "GenericProblemHooks",
    "gradient_from_multipliers",
    "gradient_generic",
    "gradient_region_closed_form",
    "GradientResult",
    "InconsistentActiveSet",
    "Infeasible",
    "InfeasibleParameter",
    "kkt_residuals",
    "KktResiduals",
    "licq_everywhere",
    "licq_status",
    "LicqViolated",
    "load_problem",
    "load_solution",
    "locate",
    "MaxIterations",
    "mpqp_hooks",
    "MpqpError",
    "MpqpProblem",
    "neighbors",
    "NoSharedBoundary",
    "NotPositiveDefinite",
    "NotSymmetric",
    "OutsideFeasibleSet",
    "ParseError",
    "PointNotInRegion",
    "Polyhedron",
    "PrimalDualSolution",
    "QuadraticForm",
    "random_problem",
    "Route",
    "row_rank",
    "run_checks",
    "save_problem",
    "save_solution",
    "simplex_solve",
    "SingularGram",
    "solve_dual_qp",
    "solve_qp",
    "solve_spd",
    "Status",
    "Unbounded",
    "validate",
    "value_at",
    "value_gradient",
]
