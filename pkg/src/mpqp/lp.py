"""Polyhedra in H-representation and a dense two-phase simplex LP solver.

The simplex works on a full tableau and uses Bland's rule for both the
entering and the leaving variable, so it terminates on degenerate problems.
Problem sizes here are tens of rows at most.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateRow, DimensionMismatch, Infeasible, MaxIterations, Unbounded
from .tolerances import DIM_TOL, LP_TOL

logger = logging.getLogger(__name__)

_PIVOT_TOL = 1e-9
_COST_TOL = 1e-10
_ZERO_ROW_TOL = 1e-14
_MAX_PIVOTS = 20000


@dataclass(frozen=True)
class Polyhedron:
    """The set {x : A x <= b}.

    Rows with a (numerically) zero normal are rejected, since they carry no
    geometry and would break distance-based tolerances.
    """

    A: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        A = np.array(self.A, dtype=float)
        b = np.array(self.b, dtype=float).reshape(-1)
        if A.ndim != 2:
            raise DimensionMismatch(f"A must be a matrix, got shape {A.shape}")
        if A.shape[0] != b.shape[0]:
            raise DimensionMismatch(f"A has {A.shape[0]} rows but b has length {b.shape[0]}")
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
            raise ValueError("polyhedron data must be finite")
        norms = np.linalg.norm(A, axis=1)
        bad = np.flatnonzero(norms <= _ZERO_ROW_TOL)
        if bad.size:
            raise DegenerateRow(f"rows {bad.tolist()} have a zero normal vector")
        A.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)

    @property
    def dim(self):
        return self.A.shape[1]

    @property
    def n_rows(self):
        return self.A.shape[0]

    def normalized(self):
        norms = np.linalg.norm(self.A, axis=1)
        return Polyhedron(self.A / norms[:, None], self.b / norms)

    def slack(self, x):
        """b - A x, one entry per row."""
        return self.b - self.A @ np.asarray(x, dtype=float)

    def contains(self, x, tol=LP_TOL):
        s = self.slack(x)
        return bool(s.size == 0 or s.min() >= -tol)

    def intersect(self, other):
        return Polyhedron(np.vstack([self.A, other.A]), np.concatenate([self.b, other.b]))


def _pivot(T, r, c):
    T[r] /= T[r, c]
    col = T[:, c].copy()
    col[r] = 0.0
    T -= np.outer(col, T[r])


def _iterate(T, basis, n_cols):
    """Run Bland-rule pivots on tableau T until optimal.

    The last row of T holds reduced costs (and minus the objective in the
    last column). Only the first ``n_cols`` columns may enter the basis.
    """
    for _ in range(_MAX_PIVOTS):
        reduced = T[-1, :n_cols]
        candidates = np.flatnonzero(reduced < -_COST_TOL)
        if candidates.size == 0:
            return
        enter = int(candidates[0])
        column = T[:-1, enter]
        rows = np.flatnonzero(column > _PIVOT_TOL)
        if rows.size == 0:
            raise Unbounded("objective is unbounded below")
        ratios = T[rows, -1] / column[rows]
        best = ratios.min()
        tied = rows[ratios <= best + 1e-12 * max(1.0, abs(best))]
        leave = int(min(tied, key=lambda i: basis[i]))
        _pivot(T, leave, enter)
        basis[leave] = enter
    raise MaxIterations("simplex exceeded its pivot limit")


def simplex_solve(c, P):
    """Minimize c^T x over the polyhedron P (x free).

    Returns ``(x, value)``. Raises Infeasible or Unbounded.
    """
    c = np.asarray(c, dtype=float).reshape(-1)
    A, b = P.A, P.b
    k, n = A.shape
    if c.shape[0] != n:
        raise DimensionMismatch(f"cost has length {c.shape[0]}, polyhedron dimension is {n}")

    # Standard form: x = xp - xm, A xp - A xm + s = b, all variables >= 0.
    sign = np.where(b < 0, -1.0, 1.0)
    neg_rows = np.flatnonzero(b < 0)
    n_struct = 2 * n + k
    n_art = neg_rows.size
    T = np.zeros((k + 1, n_struct + n_art + 1))
    T[:k, :n] = A * sign[:, None]
    T[:k, n:2 * n] = -A * sign[:, None]
    T[:k, 2 * n:2 * n + k] = np.diag(sign)
    T[:k, -1] = b * sign
    basis = list(range(2 * n, 2 * n + k))
    for a, row in enumerate(neg_rows):
        T[row, n_struct + a] = 1.0
        basis[row] = n_struct + a

    if n_art:
        # Phase 1: minimize the sum of artificials.
        T[-1, :] = 0.0
        T[-1, n_struct:n_struct + n_art] = 1.0
        for row in neg_rows:
            T[-1] -= T[row]
        _iterate(T, basis, n_struct + n_art)
        infeasibility = -T[-1, -1]
        if infeasibility > LP_TOL * max(1.0, np.abs(b).max()):
            raise Infeasible(f"polyhedron is empty (phase-1 residual {infeasibility:.3e})")
        keep = []
        for r in range(k):
            if basis[r] >= n_struct:
                nonzero = np.flatnonzero(np.abs(T[r, :n_struct]) > _PIVOT_TOL)
                if nonzero.size == 0:
                    logger.debug("dropping redundant row %d after phase 1", r)
                    continue
                _pivot(T, r, int(nonzero[0]))
                basis[r] = int(nonzero[0])
            keep.append(r)
        T = np.vstack([T[keep], T[-1:]])
        T = np.delete(T, np.s_[n_struct:n_struct + n_art], axis=1)
        basis = [basis[r] for r in keep]

    cost = np.concatenate([c, -c, np.zeros(k)])
    T[-1, :] = 0.0
    T[-1, :n_struct] = cost
    for r, j in enumerate(basis):
        T[-1] -= cost[j] * T[r]
    _iterate(T, basis, n_struct)

    y = np.zeros(n_struct)
    for r, j in enumerate(basis):
        y[j] = T[r, -1]
    x = y[:n] - y[n:2 * n]
    return x, float(c @ x)


def _ball_lp(P):
    n = P.dim
    norms = np.linalg.norm(P.A, axis=1)
    A = np.vstack([np.hstack([P.A, norms[:, None]]), np.eye(n + 1)[-1:] * -1.0])
    b = np.concatenate([P.b, [0.0]])
    cost = np.zeros(n + 1)
    cost[-1] = -1.0
    sol, _ = simplex_solve(cost, Polyhedron(A, b))
    return sol[:n], max(float(sol[-1]), 0.0)


def chebyshev_center(P, dim_tol=DIM_TOL):
    """Largest ball inside P: returns ``(center, radius)``.

    If the radius is unbounded the returned radius is ``math.inf`` and the
    center is the Chebyshev center of P cut to the box |x_i| <= B, with B
    growing from 10 by factors of 10 until the cut region is
    full-dimensional. Raises Infeasible when P is empty.
    """
    try:
        return _ball_lp(P)
    except Unbounded:
        pass
    n = P.dim
    box_A = np.vstack([np.eye(n), -np.eye(n)])
    center = None
    for exponent in range(1, 13):
        B = 10.0 ** exponent
        try:
            center, radius = _ball_lp(P.intersect(Polyhedron(box_A, np.full(2 * n, B))))
        except Infeasible:
            continue
        if radius > dim_tol:
            break
    if center is None:
        raise Infeasible("unbounded polyhedron has no point within |x| <= 1e12")
    return center, math.inf
