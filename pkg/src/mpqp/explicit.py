"""Explicit (piecewise affine) solution of an mpQP over its critical regions.

For an active set E satisfying LICQ the optimal multipliers and optimizer
are affine in x:

    lambda_E(x) = -(G_E H^-1 G_E')^-1 (W_E + S_E x)
    z(x)        = -H^-1 G_E' lambda_E(x)

and the region where E is optimal is the polyhedron cut out by
lambda_E(x) >= 0 and primal feasibility of the remaining constraints.
Regions are found by exhaustive enumeration of active sets with
|E| <= min(m, s), keeping the full-dimensional ones.
"""

import enum
import functools
import itertools
import json
import logging
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    EmptyRegion,
    Infeasible,
    LicqViolated,
    NotPositiveDefinite,
    OutsideFeasibleSet,
    SingularGram,
)
from .linalg import cholesky_solve, cholesky_spd, row_rank
from .lp import Polyhedron, chebyshev_center, simplex_solve
from .problem import format_active_set, problem_from_dict, problem_to_dict
from .tolerances import BND_TOL, DIM_TOL, LICQ_TOL, LP_TOL

logger = logging.getLogger(__name__)

_ZERO_NORMAL = 1e-12


class Containment(str, enum.Enum):
    INTERIOR = "Interior"
    BOUNDARY = "Boundary"


@dataclass(frozen=True)
class AffineMap:
    """x -> F x + c."""

    F: np.ndarray
    c: np.ndarray

    def __call__(self, x):
        return self.F @ np.asarray(x, dtype=float) + self.c


@dataclass(frozen=True)
class QuadraticForm:
    """x -> 1/2 x'Qx + q'x + r."""

    Q: np.ndarray
    q: np.ndarray
    r: float

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return float(0.5 * x @ self.Q @ x + self.q @ x + self.r)

    def gradient(self, x):
        return self.Q @ np.asarray(x, dtype=float) + self.q


@dataclass(frozen=True)
class CriticalRegion:
    active_set: tuple
    lambda_map: AffineMap
    z_map: AffineMap
    region: Polyhedron
    value_form: QuadraticForm
    chebyshev_radius: float
    chebyshev_center: np.ndarray

    def multipliers(self, x, m):
        """Full m-vector of multipliers at x (zero off the active set)."""
        lam = np.zeros(m)
        lam[list(self.active_set)] = self.lambda_map(x)
        return lam


@dataclass(frozen=True)
class ExplicitSolution:
    problem: object
    regions: tuple
    adjacency: tuple

    @functools.cached_property
    def _stacked(self):
        n = self.problem.n
        A = np.vstack([r.region.A for r in self.regions] + [np.zeros((0, n))])
        b = np.concatenate([r.region.b for r in self.regions] + [np.zeros(0)])
        counts = np.array([r.region.n_rows for r in self.regions], dtype=int)
        starts = np.concatenate([[0], np.cumsum(counts)[:-1]]).astype(int)
        nonempty = np.flatnonzero(counts > 0)
        return A, b, starts[nonempty], nonempty

    def min_slacks(self, points):
        """Smallest facet slack of each region at each point, shape (k, regions).

        Regions without inequalities get +inf.
        """
        X = np.atleast_2d(np.asarray(points, dtype=float))
        A, b, starts, nonempty = self._stacked
        out = np.full((X.shape[0], len(self.regions)), np.inf)
        if nonempty.size:
            slack = b[None, :] - X @ A.T
            out[:, nonempty] = np.minimum.reduceat(slack, starts, axis=1)
        return out

    def covers(self, points, lp_tol=LP_TOL):
        """Boolean per point: inside some region closure (within lp_tol)."""
        if not self.regions:
            return np.zeros(np.atleast_2d(points).shape[0], dtype=bool)
        return self.min_slacks(points).max(axis=1) >= -lp_tol


def _gram_factor(problem, E):
    GE = problem.G[list(E)]
    if row_rank(GE, LICQ_TOL) < len(E):
        raise LicqViolated(f"rows {format_active_set(E)} of G are linearly dependent")
    try:
        return GE, cholesky_spd(GE @ problem.solve_H(GE.T))
    except NotPositiveDefinite as exc:
        raise SingularGram(f"Gram matrix for {format_active_set(E)} is singular: {exc}") from None


def multipliers_for_active_set(problem, E):
    """Affine map x -> lambda_E(x) for active set E (0-based indices)."""
    E = tuple(E)
    if not E:
        return AffineMap(np.zeros((0, problem.n)), np.zeros(0))
    _, L = _gram_factor(problem, E)
    idx = list(E)
    return AffineMap(-cholesky_solve(L, problem.S[idx]), -cholesky_solve(L, problem.W[idx]))


def optimizer_for_active_set(problem, E, lambda_map):
    """Affine map x -> z(x) = -H^-1 G_E' lambda_E(x)."""
    E = tuple(E)
    if not E:
        return AffineMap(np.zeros((problem.s, problem.n)), np.zeros(problem.s))
    HinvGt = problem.solve_H(problem.G[list(E)].T)
    return AffineMap(-HinvGt @ lambda_map.F, -HinvGt @ lambda_map.c)


def region_polyhedron(problem, E, lambda_map, z_map):
    """Parameters where E is an optimal active set, as a closed polyhedron.

    Rows: -lambda_E(x) <= 0, and G_j z(x) - S_j x - W_j <= 0 for j not in E,
    scaled to unit normals. Rows that do not depend on x are dropped when
    they always hold; EmptyRegion is raised when one can never hold.
    """
    E = set(E)
    rows = [(-lambda_map.F[k], lambda_map.c[k]) for k in range(len(lambda_map.c))]
    for j in range(problem.m):
        if j not in E:
            a = problem.G[j] @ z_map.F - problem.S[j]
            rows.append((a, problem.W[j] - problem.G[j] @ z_map.c))
    A, b = [], []
    for a, beta in rows:
        norm = np.linalg.norm(a)
        if norm <= _ZERO_NORMAL * max(1.0, abs(beta)):
            if beta < -LP_TOL:
                raise EmptyRegion(f"constant inequality 0 <= {beta:.3e} fails")
            continue
        A.append(a / norm)
        b.append(beta / norm)
    if not A:
        return Polyhedron(np.zeros((0, problem.n)), np.zeros(0))
    return Polyhedron(np.array(A), np.array(b) + 0.0)


def value_form_for_region(problem, z_map):
    """V(x) = 1/2 z(x)'H z(x) expanded as a quadratic in x."""
    HF = problem.H @ z_map.F
    Q = z_map.F.T @ HF
    return QuadraticForm(
        Q=0.5 * (Q + Q.T),
        q=HF.T @ z_map.c,
        r=0.5 * float(z_map.c @ problem.H @ z_map.c),
    )


def build_region(problem, E):
    """Assemble the critical region for E; raises if E yields no region."""
    lam = multipliers_for_active_set(problem, E)
    zmap = optimizer_for_active_set(problem, E, lam)
    poly = region_polyhedron(problem, E, lam, zmap)
    center, radius = chebyshev_center(poly)
    return CriticalRegion(
        active_set=tuple(E),
        lambda_map=lam,
        z_map=zmap,
        region=poly,
        value_form=value_form_for_region(problem, zmap),
        chebyshev_radius=radius,
        chebyshev_center=center,
    )


def enumerate_regions(problem, dim_tol=DIM_TOL):
    """All full-dimensional critical regions, by exhaustive active-set search.

    Regions are ordered by active-set size, then lexicographically; ``locate``
    relies on that order for tie-breaking.
    """
    regions = []
    for size in range(min(problem.m, problem.s) + 1):
        for E in itertools.combinations(range(problem.m), size):
            try:
                region = build_region(problem, E)
            except (LicqViolated, SingularGram, EmptyRegion, Infeasible) as exc:
                logger.debug("skipping %s: %s", format_active_set(E), exc)
                continue
            if region.chebyshev_radius <= dim_tol:
                logger.debug("skipping %s: radius %.3e", format_active_set(E), region.chebyshev_radius)
                continue
            regions.append(region)
    solution = ExplicitSolution(problem, tuple(regions), ())
    return ExplicitSolution(problem, tuple(regions), tuple(neighbors(solution)))


def locate(solution, x, lp_tol=LP_TOL, bnd_tol=BND_TOL):
    """Region containing x: returns ``(index, Containment)``.

    Among several containing regions the first in enumeration order wins
    (smallest active set, then lexicographic).
    """
    x = solution.problem.check_parameter(x)
    for i, region in enumerate(solution.regions):
        slack = region.region.slack(x)
        worst = slack.min() if slack.size else math.inf
        if worst >= -lp_tol:
            status = Containment.INTERIOR if worst > bnd_tol else Containment.BOUNDARY
            return i, status
    raise OutsideFeasibleSet(f"no critical region contains x = {x.tolist()}")


def closures_intersect(r1, r2, lp_tol=LP_TOL):
    """A point within lp_tol of both closed regions, or None."""
    both = r1.region.intersect(r2.region)
    relaxed = Polyhedron(both.A, both.b + lp_tol)
    try:
        point, _ = simplex_solve(np.zeros(both.dim), relaxed)
    except Infeasible:
        return None
    return point


def neighbors(solution, lp_tol=LP_TOL):
    """Index pairs (i, j), i < j, of regions whose closures meet."""
    pairs = []
    for i, j in itertools.combinations(range(len(solution.regions)), 2):
        if closures_intersect(solution.regions[i], solution.regions[j], lp_tol) is not None:
            pairs.append((i, j))
    return pairs


# -- serialization -----------------------------------------------------------

def _radius_to_json(r):
    return None if math.isinf(r) else r


def solution_to_dict(solution):
    regions = []
    for reg in solution.regions:
        regions.append({
            "active_set": [i + 1 for i in reg.active_set],
            "F_lambda": reg.lambda_map.F.tolist(),
            "c_lambda": reg.lambda_map.c.tolist(),
            "F_z": reg.z_map.F.tolist(),
            "c_z": reg.z_map.c.tolist(),
            "region_A": reg.region.A.tolist(),
            "region_b": reg.region.b.tolist(),
            "Q": reg.value_form.Q.tolist(),
            "q": reg.value_form.q.tolist(),
            "r": reg.value_form.r,
            "chebyshev_radius": _radius_to_json(reg.chebyshev_radius),
            "chebyshev_center": reg.chebyshev_center.tolist(),
        })
    return {
        "index_base": 1,
        "problem": problem_to_dict(solution.problem),
        "regions": regions,
        "adjacency": [list(p) for p in solution.adjacency],
    }


def save_solution(solution):
    return json.dumps(solution_to_dict(solution))


def solution_from_dict(doc):
    problem = problem_from_dict(doc["problem"])
    s, n = problem.s, problem.n
    base = doc.get("index_base", 1)
    regions = []
    for r in doc["regions"]:
        k = len(r["active_set"])
        radius = r["chebyshev_radius"]
        regions.append(CriticalRegion(
            active_set=tuple(i - base for i in r["active_set"]),
            lambda_map=AffineMap(np.array(r["F_lambda"], dtype=float).reshape(k, n),
                                 np.array(r["c_lambda"], dtype=float).reshape(k)),
            z_map=AffineMap(np.array(r["F_z"], dtype=float).reshape(s, n),
                            np.array(r["c_z"], dtype=float).reshape(s)),
            region=Polyhedron(np.array(r["region_A"], dtype=float).reshape(-1, n),
                              np.array(r["region_b"], dtype=float)),
            value_form=QuadraticForm(np.array(r["Q"], dtype=float).reshape(n, n),
                                     np.array(r["q"], dtype=float).reshape(n), float(r["r"])),
            chebyshev_radius=math.inf if radius is None else float(radius),
            chebyshev_center=np.array(r["chebyshev_center"], dtype=float),
        ))
    adjacency = tuple(tuple(p) for p in doc.get("adjacency", []))
    return ExplicitSolution(problem, tuple(regions), adjacency)


def load_solution(text):
    return solution_from_dict(json.loads(text))
