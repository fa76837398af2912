"""Fixed-parameter QP solvers and KKT residuals.

Two independent solvers are provided for  min 1/2 z'Hz  s.t.  G z <= b
(with b = W + S x):

* ``solve_qp``: primal active-set method started from a Phase-1 LP point.
* ``solve_dual_qp``: the Goldfarb-Idnani dual method, started from the
  unconstrained minimizer z = 0 and adding the most violated constraint.

They share no code beyond the Cholesky factor of H, so agreement between
them is a meaningful check.
"""

import enum
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import InfeasibleParameter, MaxIterations, Unbounded
from .linalg import back_solve_transposed, cholesky_spd, forward_solve, row_rank, solve_spd
from .lp import Polyhedron, simplex_solve
from .tolerances import ACT_TOL, BND_TOL, FEAS_TOL, LICQ_TOL

logger = logging.getLogger(__name__)


class Status(str, enum.Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"


@dataclass(frozen=True)
class PrimalDualSolution:
    z_star: Optional[np.ndarray]
    lambda_star: Optional[np.ndarray]
    active_set: tuple
    objective: float
    status: Status
    iterations: int = 0

    @property
    def optimal(self):
        return self.status is Status.OPTIMAL


@dataclass(frozen=True)
class KktResiduals:
    stationarity: float
    primal: float
    dual: float
    comp_slack: float

    def max(self):
        return max(self.stationarity, self.primal, self.dual, self.comp_slack)

    def as_dict(self):
        return {
            "stationarity": self.stationarity,
            "primal": self.primal,
            "dual": self.dual,
            "comp_slack": self.comp_slack,
        }


def phase_one(problem, x):
    """Minimize the largest constraint violation t over z, with t >= -1.

    Returns ``(z, t)``; the parameter is feasible iff t <= FEAS_TOL.
    """
    G, b = problem.G, problem.rhs(x)
    m, s = G.shape
    A = np.vstack([np.hstack([G, -np.ones((m, 1))]), np.eye(s + 1)[-1:] * -1.0])
    rhs = np.concatenate([b, [1.0]])
    cost = np.zeros(s + 1)
    cost[-1] = 1.0
    sol, t = simplex_solve(cost, Polyhedron(A, rhs))
    return sol[:s], t


def is_feasible_parameter(problem, x):
    x = problem.check_parameter(x)
    if problem.m == 0:
        return True
    return phase_one(problem, x)[1] <= FEAS_TOL


def in_feasible_interior(problem, x, radius=BND_TOL):
    """True if x +/- radius * e_i is feasible for every coordinate i.

    The cross-polytope spanned by those points lies in the (convex) feasible
    parameter set, so a True answer certifies a neighbourhood of x.
    """
    x = problem.check_parameter(x)
    if problem.m == 0:
        return True
    for i in range(problem.n):
        for sign in (1.0, -1.0):
            xp = x.copy()
            xp[i] += sign * radius
            if phase_one(problem, xp)[1] > FEAS_TOL:
                return False
    return True


def _equality_qp(problem, work, b):
    """Minimize 1/2 z'Hz subject to G_W z = b_W.

    Returns (z, multipliers, optimal value). The value is computed as
    1/2 |L^-1 b_W|^2 with L L' = G_W H^-1 G_W', which is less noisy than
    evaluating 1/2 z'Hz.
    """
    if not work:
        return np.zeros(problem.s), np.zeros(0), 0.0
    GW = problem.G[list(work)]
    HinvGt = problem.solve_H(GW.T)
    L = cholesky_spd(GW @ HinvGt)
    y = forward_solve(L, b[list(work)])
    mu = -back_solve_transposed(L, y)
    return -HinvGt @ mu, mu, 0.5 * float(y @ y)


def _independent_subset(G, candidates):
    chosen = []
    for i in candidates:
        if row_rank(G[chosen + [i]], LICQ_TOL) == len(chosen) + 1:
            chosen.append(i)
    return chosen


def solve_qp(problem, x, act_tol=ACT_TOL):
    """Primal active-set solve at a fixed parameter.

    Returns a PrimalDualSolution; an infeasible parameter gives status
    Infeasible rather than an exception. Raises MaxIterations if the
    working set keeps changing past 50 (m + s) iterations.
    """
    x = problem.check_parameter(x)
    m, s = problem.m, problem.s
    if m == 0:
        z = np.zeros(s)
        return PrimalDualSolution(z, np.zeros(0), (), 0.0, Status.OPTIMAL)

    b = problem.rhs(x)
    z, t = phase_one(problem, x)
    if t > FEAS_TOL:
        return PrimalDualSolution(None, None, (), float("inf"), Status.INFEASIBLE)

    G = problem.G
    g = G @ z - b
    work = _independent_subset(G, [int(i) for i in np.flatnonzero(g >= -act_tol)])
    max_iter = 50 * (m + s)
    for it in range(1, max_iter + 1):
        z_eq, mu, value = _equality_qp(problem, work, b)
        p = z_eq - z
        if np.max(np.abs(p)) <= 1e-10 * (1.0 + np.max(np.abs(z))):
            if mu.size == 0 or mu.min() >= -1e-11 * max(1.0, np.abs(mu).max()):
                z = z_eq
                break
            drop = work[int(np.argmin(mu))]
            work = [i for i in work if i != drop]
            continue
        alpha, block = 1.0, None
        Gp = G @ p
        slack = b - G @ z
        for i in range(m):
            if i in work or Gp[i] <= 1e-12 * np.linalg.norm(G[i]) * np.linalg.norm(p):
                continue
            ratio = max(slack[i], 0.0) / Gp[i]
            if ratio < alpha:
                alpha, block = ratio, i
        if block is None:
            z = z_eq
        else:
            z = z + alpha * p
            work = sorted(work + [block])
    else:
        raise MaxIterations(f"active-set method did not converge in {max_iter} iterations")

    lam = np.zeros(m)
    lam[list(work)] = mu
    g = G @ z - b
    active = tuple(int(i) for i in np.flatnonzero(g >= -act_tol))
    return PrimalDualSolution(z, lam, active, value, Status.OPTIMAL, it)


def solve_dual_qp(problem, x):
    """Maximize -1/2 l'G H^-1 G'l - l'(W + S x) over l >= 0.

    Goldfarb-Idnani dual active-set method. Returns ``(lambda, value)``.
    Raises Unbounded when the dual is unbounded, which certifies that the
    primal is infeasible at x.
    """
    x = problem.check_parameter(x)
    m, s = problem.m, problem.s
    if m == 0:
        return np.zeros(0), 0.0
    G, b = problem.G, problem.rhs(x)
    tol = 1e-11 * (1.0 + np.abs(b).max())
    z = np.zeros(s)
    act, u = [], np.zeros(0)

    max_iter = 50 * (m + s)
    for _ in range(max_iter):
        viol = G @ z - b
        p = int(np.argmax(viol))
        if viol[p] <= tol:
            break
        a = G[p]
        t_p = 0.0
        while True:
            Hinv_a = problem.solve_H(a)
            if act:
                N = G[act].T
                Hinv_N = problem.solve_H(N)
                du = -solve_spd(N.T @ Hinv_N, N.T @ Hinv_a)
                dz = -(Hinv_a + Hinv_N @ du)
            else:
                du = np.zeros(0)
                dz = -Hinv_a
            curvature = -a @ dz
            t1, k = np.inf, None
            for j in np.flatnonzero(du < -1e-14):
                ratio = u[j] / -du[j]
                if ratio < t1:
                    t1, k = ratio, int(j)
            if curvature > 1e-12 * (a @ Hinv_a):
                t2 = (a @ z - b[p]) / curvature
            else:
                t2 = np.inf
            if np.isinf(t1) and np.isinf(t2):
                raise Unbounded(f"dual unbounded: constraint {p + 1} cannot be satisfied")
            if np.isinf(t2):
                u = u + t1 * du
                t_p += t1
                act.pop(k)
                u = np.delete(u, k)
                continue
            step = min(t1, t2)
            z = z + step * dz
            u = u + step * du
            t_p += step
            if t2 <= t1:
                act.append(p)
                u = np.append(u, t_p)
                break
            act.pop(k)
            u = np.delete(u, k)
    else:
        raise MaxIterations(f"dual method did not converge in {max_iter} iterations")

    lam = np.zeros(m)
    if act:
        order = np.argsort(act)
        act = [act[i] for i in order]
        u = u[order]
        GA = G[act]
        refined = -solve_spd(GA @ problem.solve_H(GA.T), b[act])
        lam[act] = refined if refined.min() >= -1e-9 else u
    value = -0.5 * lam @ problem.dual_hessian() @ lam - lam @ b
    return lam, float(value)


def kkt_residuals(problem, x, z, lam):
    """Infinity-norm residuals of the four KKT conditions."""
    x = problem.check_parameter(x)
    z = np.asarray(z, dtype=float)
    lam = np.asarray(lam, dtype=float)
    g = problem.residual(z, x)
    stat = problem.H @ z + problem.G.T @ lam
    return KktResiduals(
        stationarity=float(np.max(np.abs(stat), initial=0.0)),
        primal=float(max(0.0, np.max(g, initial=0.0))),
        dual=float(max(0.0, -np.min(lam, initial=0.0))),
        comp_slack=float(np.max(np.abs(lam * g), initial=0.0)),
    )


def value_at(problem, x):
    """V(x); raises InfeasibleParameter outside the feasible parameter set."""
    sol = solve_qp(problem, x)
    if not sol.optimal:
        raise InfeasibleParameter(f"no feasible z at x = {np.asarray(x).tolist()}")
    return sol.objective
