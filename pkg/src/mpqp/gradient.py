"""Gradient of the value function V(x).

Three analytic routes are available and are expected to agree wherever V is
differentiable:

* region closed form:  -S_E' lambda_E(x) with lambda_E from the region's map,
* multiplier formula:  -S' lambda*(x) with lambda* from a fixed-x solve,
* generic formula:     (df/dx)' + sum_{i in E} (dg_i/dx)' lambda_i for any
  problem given through GenericProblemHooks.

Central finite differences of V provide an independent check.
"""

import enum
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import (
    BoundaryPoint,
    DimensionMismatch,
    InconsistentActiveSet,
    Infeasible,
    InfeasibleParameter,
    NoSharedBoundary,
    OutsideFeasibleSet,
    PointNotInRegion,
)
from .explicit import Containment, closures_intersect, locate
from .lp import Polyhedron, simplex_solve
from .oracle import solve_qp, value_at
from .problem import mpqp_hooks
from .tolerances import BND_TOL, DUAL_TOL, FD_STEP, KKT_TOL, LP_TOL


class Route(str, enum.Enum):
    REGION = "region"
    MULTIPLIER = "multiplier"
    GENERIC = "generic"
    FD = "fd"


class BoundaryWarning(UserWarning):
    """Gradient requested at a point on a critical-region facet."""


@dataclass(frozen=True)
class GradientResult:
    gradient: np.ndarray
    route: Route
    x: np.ndarray
    region_index: Optional[int] = None
    boundary: bool = False


@dataclass(frozen=True)
class FiniteDiffReport:
    fd_gradient: np.ndarray
    analytic: np.ndarray
    max_abs_err: float
    step: float


def gradient_from_multipliers(problem, lambda_star):
    """-S' lambda*."""
    lam = np.asarray(lambda_star, dtype=float)
    if lam.shape != (problem.m,):
        raise DimensionMismatch(f"multipliers have shape {lam.shape}, expected ({problem.m},)")
    if lam.size and lam.min() < -DUAL_TOL:
        raise ValueError(f"multipliers must be nonnegative, min is {lam.min():.3e}")
    return -problem.S.T @ lam


def _closed_form(problem, region, x):
    if not region.active_set:
        return np.zeros(problem.n)
    S_E = problem.S[list(region.active_set)]
    return -S_E.T @ region.lambda_map(x)


def gradient_region_closed_form(problem, region, x, allow_boundary=False,
                                lp_tol=LP_TOL, bnd_tol=BND_TOL):
    """-S_E' (G_E H^-1 G_E')^-1 (W_E + S_E x) on the interior of a region.

    Raises PointNotInRegion outside the region and BoundaryPoint within
    ``bnd_tol`` of a facet unless ``allow_boundary`` is set.
    """
    x = problem.check_parameter(x)
    slack = region.region.slack(x)
    if slack.size:
        if slack.min() < -lp_tol:
            raise PointNotInRegion(f"x = {x.tolist()} lies outside the region")
        if slack.min() <= bnd_tol and not allow_boundary:
            raise BoundaryPoint(f"x = {x.tolist()} is on a facet of the region")
    return _closed_form(problem, region, x)


def gradient_generic(hooks, x, z_star, lambda_star, E, kkt_tol=KKT_TOL):
    """(df/dx)' + sum over i in E of lambda_i (dg_i/dx)', evaluated at z*.

    Multipliers outside E must vanish (complementary slackness); otherwise
    InconsistentActiveSet is raised instead of returning a plausible but
    wrong gradient.
    """
    x = np.asarray(x, dtype=float).reshape(-1)
    z = np.asarray(z_star, dtype=float).reshape(-1)
    lam = np.asarray(lambda_star, dtype=float).reshape(-1)
    if x.shape != (hooks.n,) or z.shape != (hooks.s,) or lam.shape != (hooks.m,):
        raise DimensionMismatch(
            f"expected x, z, lambda of lengths ({hooks.n}, {hooks.s}, {hooks.m}), "
            f"got ({x.size}, {z.size}, {lam.size})"
        )
    E = sorted(set(int(i) for i in E))
    if E and (E[0] < 0 or E[-1] >= hooks.m):
        raise InconsistentActiveSet(f"active set {E} out of range")
    outside = np.setdiff1d(np.arange(hooks.m), E)
    if outside.size and np.max(np.abs(lam[outside])) > kkt_tol:
        j = int(outside[np.argmax(np.abs(lam[outside]))])
        raise InconsistentActiveSet(
            f"constraint {j + 1} has multiplier {lam[j]:.3e} but is not in the active set"
        )
    grad = np.array(hooks.eval_dfdx(z, x), dtype=float).reshape(-1)
    if grad.shape != (hooks.n,):
        raise DimensionMismatch(f"eval_dfdx returned shape {grad.shape}")
    if E:
        J = np.asarray(hooks.eval_dgdx(z, x), dtype=float)
        if J.shape != (hooks.m, hooks.n):
            raise DimensionMismatch(f"eval_dgdx returned shape {J.shape}")
        grad = grad + J[E].T @ lam[E]
    return grad


def finite_difference_gradient(value_fn, x, step=FD_STEP):
    """Central differences (f(x + h e_i) - f(x - h e_i)) / 2h."""
    if step <= 0:
        raise ValueError("step must be positive")
    x = np.asarray(x, dtype=float).reshape(-1)
    grad = np.zeros_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = step
        grad[i] = (value_fn(x + e) - value_fn(x - e)) / (2 * step)
    return grad


def finite_difference_report(value_fn, x, analytic, step=FD_STEP):
    fd = finite_difference_gradient(value_fn, x, step)
    analytic = np.asarray(analytic, dtype=float)
    err = float(np.max(np.abs(fd - analytic), initial=0.0))
    return FiniteDiffReport(fd, analytic, err, step)


def value_gradient(solution, x, route=Route.REGION):
    """Gradient of V at x by the chosen route.

    Points on a region facet are evaluated with the tie-break region and
    flagged (a BoundaryWarning is issued) rather than refused.
    Raises InfeasibleParameter outside the feasible parameter set.
    """
    route = Route(route)
    problem = solution.problem
    x = problem.check_parameter(x)

    if route is Route.FD:
        grad = finite_difference_gradient(lambda y: value_at(problem, y), x)
        return GradientResult(grad, route, x)

    sol = None
    if route is not Route.REGION:
        sol = solve_qp(problem, x)
        if not sol.optimal:
            raise InfeasibleParameter(f"no feasible z at x = {x.tolist()}")
    try:
        index, status = locate(solution, x)
    except OutsideFeasibleSet:
        if sol is None and not solve_qp(problem, x).optimal:
            raise InfeasibleParameter(f"no feasible z at x = {x.tolist()}") from None
        if route is Route.REGION:
            raise
        index, status = None, Containment.INTERIOR
    boundary = status is Containment.BOUNDARY
    if boundary:
        warnings.warn(f"x = {x.tolist()} lies on a critical-region boundary", BoundaryWarning,
                      stacklevel=2)

    if route is Route.REGION:
        grad = gradient_region_closed_form(problem, solution.regions[index], x, allow_boundary=True)
    elif route is Route.MULTIPLIER:
        grad = gradient_from_multipliers(problem, np.maximum(sol.lambda_star, 0.0))
    else:
        grad = gradient_generic(mpqp_hooks(problem), x, sol.z_star, sol.lambda_star, sol.active_set)
    return GradientResult(grad, route, x, index, boundary)


def in_covered_interior(solution, x, radius=BND_TOL):
    """True if x +/- radius * e_i lies in some region closure for every i.

    The regions cover the feasible parameter set, which is convex, so this
    certifies a neighbourhood of x without solving any LP.
    """
    x = np.asarray(x, dtype=float)
    offsets = np.vstack([np.eye(x.size), -np.eye(x.size)]) * radius
    return bool(np.all(solution.covers(x + offsets)))


def shared_boundary_samples(solution, pair, samples, rng, spread=1.0, interior_radius=BND_TOL):
    """Random points on cl(R_i) & cl(R_j) that lie inside the feasible set.

    The shared set is convex, so random convex combinations of its vertices
    (found with random-cost LPs inside a box of half-width ``spread``) stay
    on it. Points within ``interior_radius`` of the feasible set's boundary
    are discarded.
    """
    i, j = pair
    r1, r2 = solution.regions[i], solution.regions[j]
    if closures_intersect(r1, r2) is None:
        raise NoSharedBoundary(f"regions {i} and {j} do not touch")
    n = solution.problem.n
    both = r1.region.intersect(r2.region)
    try:
        anchor, _ = simplex_solve(np.zeros(n), both)
        shared = both
    except Infeasible:
        # closures only touch within lp_tol
        shared = Polyhedron(both.A, both.b + LP_TOL)
        anchor, _ = simplex_solve(np.zeros(n), shared)
    box = Polyhedron(
        np.vstack([shared.A, np.eye(n), -np.eye(n)]),
        np.concatenate([shared.b, anchor + spread, spread - anchor]),
    )
    vertices = [anchor]
    for _ in range(max(2, min(samples, 2 * n + 2))):
        v, _ = simplex_solve(rng.standard_normal(n), box)
        vertices.append(v)
    vertices = np.array(vertices)

    candidates = rng.dirichlet(np.ones(len(vertices)), size=4 * samples) @ vertices
    offsets = np.vstack([np.eye(n), -np.eye(n)]) * interior_radius
    probes = (candidates[:, None, :] + offsets[None, :, :]).reshape(-1, n)
    inside = solution.covers(probes).reshape(len(candidates), 2 * n).all(axis=1)
    points = candidates[inside][:samples]
    if not len(points):
        raise NoSharedBoundary(f"regions {i} and {j} only meet on the feasible set's boundary")
    return points


def check_gradient_continuity(solution, pair, samples=20, seed=0, spread=1.0, point_filter=None):
    """Max |grad_i - grad_j| over points sampled on the shared boundary.

    Both gradients are the closed forms of the two regions, evaluated at the
    same boundary point. ``point_filter(x, z)``, if given, drops sample points
    for which it returns False (z is region i's optimizer at x).
    """
    i, j = pair
    rng = np.random.default_rng(seed)
    points = shared_boundary_samples(solution, pair, samples, rng, spread)
    problem = solution.problem
    r1, r2 = solution.regions[i], solution.regions[j]
    if point_filter is not None:
        points = [x for x in points if point_filter(x, r1.z_map(x))]
        if not points:
            raise NoSharedBoundary(f"no admissible sample on the boundary of regions {i} and {j}")
    return max(
        float(np.max(np.abs(_closed_form(problem, r1, x) - _closed_form(problem, r2, x)), initial=0.0))
        for x in points
    )


def duality_value_identity(problem, x):
    """|V(x) - (-1/2 l'GH^-1G'l - l'(W + S x))| at the primal multipliers l."""
    sol = solve_qp(problem, x)
    if not sol.optimal:
        raise InfeasibleParameter(f"no feasible z at x = {np.asarray(x).tolist()}")
    lam = sol.lambda_star
    dual = -0.5 * lam @ problem.dual_hessian() @ lam - lam @ problem.rhs(x)
    return abs(sol.objective - float(dual))
