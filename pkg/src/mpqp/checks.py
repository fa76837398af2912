"""Verification suite: samples parameters and checks the explicit solution,
the oracle and the gradient routes against each other.
"""

import enum
import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import Infeasible, NoSharedBoundary, OutsideFeasibleSet
from .explicit import Containment, enumerate_regions, locate
from .gradient import (
    check_gradient_continuity,
    duality_value_identity,
    finite_difference_gradient,
    gradient_from_multipliers,
    gradient_generic,
    gradient_region_closed_form,
)
from .linalg import row_rank
from .lp import Polyhedron, simplex_solve
from .oracle import kkt_residuals, solve_dual_qp, solve_qp, value_at
from .problem import mpqp_hooks
from .tolerances import ACT_TOL, BND_TOL, CONT_TOL, DUALITY_TOL, FD_STEP, KKT_TOL, LICQ_TOL

AGREE_TOL = 1e-6  # explicit vs oracle, primal vs dual multipliers, FD
ROUTE_TOL = 1e-7
CONSISTENCY_TOL = 1e-8
CONVEXITY_SLACK = 1e-8
FD_MARGIN = 1e-4


class CheckStatus(str, enum.Enum):
    PASS = "Pass"
    FAIL = "Fail"
    SKIP = "Skip"


@dataclass(frozen=True)
class CheckResult:
    name: str
    status: CheckStatus
    measured: float
    threshold: float
    detail: str = ""


@dataclass
class CheckReport:
    checks: list = field(default_factory=list)

    def add(self, name, measured, threshold, detail=""):
        status = CheckStatus.PASS if measured <= threshold else CheckStatus.FAIL
        self.checks.append(CheckResult(name, status, float(measured) + 0.0, threshold, detail))

    def skip(self, name, threshold, reason):
        self.checks.append(CheckResult(name, CheckStatus.SKIP, math.nan, threshold, reason))

    @property
    def passed(self):
        return all(c.status is not CheckStatus.FAIL for c in self.checks)

    def to_dict(self):
        return {
            "passed": self.passed,
            "checks": [
                {
                    "name": c.name,
                    "status": c.status.value,
                    "measured": None if math.isnan(c.measured) else c.measured,
                    "threshold": c.threshold,
                    "detail": c.detail,
                }
                for c in self.checks
            ],
        }

    def render_text(self):
        lines = []
        for c in self.checks:
            measured = "-" if math.isnan(c.measured) else f"{c.measured:.3e}"
            line = f"{c.status.value:<4}  {c.name:<24} measured={measured:<10} threshold={c.threshold:.1e}"
            if c.detail:
                line += f"  ({c.detail})"
            lines.append(line)
        lines.append("all checks passed" if self.passed else "some checks FAILED")
        return "\n".join(lines)


class Licq(str, enum.Enum):
    CERTIFIED = "certified"    # holds at every feasible parameter
    GENERIC = "generic"        # may fail only where more than s constraints are active
    DEGENERATE = "degenerate"  # at most s dependent rows can be active together


def _dependent_sets(problem):
    """Minimal linearly dependent row subsets of G with at most s + 1 rows."""
    m, s = problem.m, problem.s
    dependent = []
    for size in range(1, min(m, s + 1) + 1):
        for E in itertools.combinations(range(m), size):
            if any(set(D) <= set(E) for D in dependent):
                continue
            if row_rank(problem.G[list(E)], LICQ_TOL) < size:
                dependent.append(E)
    return dependent


def _can_be_active(problem, E):
    """LP test for (z, x, l_E >= 0) with H z + G_E' l_E = 0, G_E z - S_E x = W_E
    and G z - S x <= W, i.e. a parameter where all of E is active at the optimum."""
    m, s, n = problem.m, problem.s, problem.n
    k = len(E)
    GE, SE, WE = problem.G[list(E)], problem.S[list(E)], problem.W[list(E)]
    eq = np.vstack([
        np.hstack([problem.H, np.zeros((s, n)), GE.T]),
        np.hstack([GE, -SE, np.zeros((k, k))]),
    ])
    eq_rhs = np.concatenate([np.zeros(s), WE])
    A = np.vstack([
        eq,
        -eq,
        np.hstack([problem.G, -problem.S, np.zeros((m, k))]),
        np.hstack([np.zeros((k, s + n)), -np.eye(k)]),
    ])
    b = np.concatenate([eq_rhs, -eq_rhs, problem.W, np.zeros(k)])
    keep = np.linalg.norm(A, axis=1) > 0
    if np.any(b[~keep] < 0):
        return False
    try:
        simplex_solve(np.zeros(s + n + k), Polyhedron(A[keep], b[keep]))
    except Infeasible:
        return False
    return True


def licq_status(problem):
    """Classify where LICQ can fail, from the dependent row subsets of G that
    can be simultaneously active at an optimum.

    A dependent set of more than s rows is active only on a lower-dimensional
    set of parameters (s + 1 equalities in z), so per-point checks remain
    meaningful away from it.
    """
    reachable = [E for E in _dependent_sets(problem) if _can_be_active(problem, E)]
    if not reachable:
        return Licq.CERTIFIED
    if any(len(E) <= problem.s for E in reachable):
        return Licq.DEGENERATE
    return Licq.GENERIC


def licq_everywhere(problem):
    """True if LICQ provably holds at every feasible parameter.

    The test is conservative: False may be pessimistic, since the offending
    points can lie on the boundary of the feasible set.
    """
    return licq_status(problem) is Licq.CERTIFIED


def licq_at(problem, x, z, act_tol=ACT_TOL):
    """LICQ at the point (z, x): rows of G active there are independent."""
    active = np.flatnonzero(problem.residual(z, x) >= -act_tol)
    return row_rank(problem.G[active], LICQ_TOL) == active.size


def sampling_box(solution, minimum=3.0, maximum=10.0):
    """Half-width of an origin-centred box around the bounded regions.

    Unbounded regions are ignored: their centers can sit arbitrarily far out
    along a thin cone and would only inflate the box. The width is capped at
    ``maximum`` because V grows quadratically in x, and once |V| reaches about
    1e4 rounding in central differences alone exceeds the absolute FD
    tolerance.
    """
    centers = [np.max(np.abs(r.chebyshev_center)) for r in solution.regions
               if r.chebyshev_center.size and math.isfinite(r.chebyshev_radius)]
    return min(maximum, max([minimum] + [1.5 * c + 1.0 for c in centers]))


def sample_points(problem, rng, count, half_width):
    return rng.uniform(-half_width, half_width, size=(count, problem.n))


def interior_points(solution, rng, count, half_width, margin=0.0, max_draws=None):
    """Up to ``count`` random points strictly inside some region.

    ``margin`` additionally requires that distance to every facet of the
    region. Returns a list of (x, region_index).
    """
    out = []
    max_draws = max_draws or 50 * count
    for _ in range(max_draws):
        if len(out) == count:
            break
        x = rng.uniform(-half_width, half_width, size=solution.problem.n)
        try:
            i, status = locate(solution, x)
        except OutsideFeasibleSet:
            continue
        if status is not Containment.INTERIOR:
            continue
        slack = solution.regions[i].region.slack(x)
        if slack.size and slack.min() <= margin:
            continue
        out.append((x, i))
    return out


def run_checks(problem, seed=42, samples=100, solution=None):
    """Run the full invariant suite and return a CheckReport.

    Checks that need unique multipliers use only points where LICQ holds.
    They are skipped outright when dependent constraints of at most s rows
    can be active together.
    """
    rng = np.random.default_rng(seed)
    solution = solution or enumerate_regions(problem)
    report = CheckReport()
    licq = licq_status(problem)
    skip_licq = licq is Licq.DEGENERATE
    no_licq = "dependent constraints can be active together, LICQ fails"
    half = sampling_box(solution)
    m = problem.m

    def regular(x, z):
        return licq is Licq.CERTIFIED or licq_at(problem, x, z)

    # oracle checks on random feasible parameters
    feasible = []
    for x in sample_points(problem, rng, samples, half):
        sol = solve_qp(problem, x)
        if sol.optimal:
            feasible.append((x, sol))
    if not feasible:
        for name in ("kkt", "strong_duality", "dual_value_identity", "stationarity_identity",
                     "multiplier_agreement", "coverage", "convexity"):
            report.skip(name, math.nan, "no feasible sample")
    else:
        kkt = stat = sd = alt1 = lam_gap = 0.0
        uncovered = regular_count = 0
        for x, sol in feasible:
            kkt = max(kkt, kkt_residuals(problem, x, sol.z_star, sol.lambda_star).max())
            stat = max(stat, np.max(np.abs(
                sol.z_star + problem.solve_H(problem.G.T @ sol.lambda_star)), initial=0.0))
            lam_d, v_d = solve_dual_qp(problem, x)
            sd = max(sd, abs(sol.objective - v_d))
            alt1 = max(alt1, duality_value_identity(problem, x))
            if regular(x, sol.z_star):
                lam_gap = max(lam_gap, np.max(np.abs(lam_d - sol.lambda_star), initial=0.0))
                regular_count += 1
            try:
                locate(solution, x)
            except OutsideFeasibleSet:
                uncovered += 1
        report.add("kkt", kkt, KKT_TOL)
        report.add("strong_duality", sd, DUALITY_TOL)
        report.add("dual_value_identity", alt1, DUALITY_TOL)
        report.add("stationarity_identity", stat, KKT_TOL)
        if skip_licq:
            report.skip("multiplier_agreement", AGREE_TOL, no_licq)
        elif regular_count:
            report.add("multiplier_agreement", lam_gap, AGREE_TOL, f"{regular_count} LICQ points")
        else:
            report.skip("multiplier_agreement", AGREE_TOL, "no sample satisfies LICQ")
        report.add("coverage", uncovered, 0, f"{len(feasible)} feasible samples")

        pairs = [(feasible[rng.integers(len(feasible))][0], feasible[rng.integers(len(feasible))][0])
                 for _ in range(samples)]
        worst = -math.inf
        for x1, x2 in pairs:
            theta = rng.uniform(0.0, 1.0)
            mid = value_at(problem, theta * x1 + (1 - theta) * x2)
            worst = max(worst, mid - theta * value_at(problem, x1) - (1 - theta) * value_at(problem, x2))
        report.add("convexity", max(worst, 0.0), CONVEXITY_SLACK)

    # consistency of every region's maps at its Chebyshev center
    v_gap = k_gap = 0.0
    for reg in solution.regions:
        c = reg.chebyshev_center
        v_gap = max(v_gap, abs(reg.value_form(c) - value_at(problem, c)))
        k_gap = max(k_gap, kkt_residuals(problem, c, reg.z_map(c), reg.multipliers(c, m)).max())
    report.add("center_value", v_gap, CONSISTENCY_TOL, f"{len(solution.regions)} regions")
    report.add("center_kkt", k_gap, KKT_TOL)

    # explicit-solution checks at region-interior points
    inner = interior_points(solution, rng, samples, half)
    if not inner:
        for name in ("oracle_z", "oracle_lambda", "partition", "route_agreement",
                     "fd_agreement", "monotonicity"):
            report.skip(name, math.nan, "no region-interior sample")
    else:
        dz = dl = route = fd = 0.0
        overlaps = 0
        hooks = mpqp_hooks(problem)
        grads = []
        fd_count = regular_count = 0
        for x, i in inner:
            reg = solution.regions[i]
            sol = solve_qp(problem, x)
            dz = max(dz, np.max(np.abs(reg.z_map(x) - sol.z_star)))
            if regular(x, sol.z_star):
                regular_count += 1
                dl = max(dl, np.max(np.abs(reg.multipliers(x, m) - sol.lambda_star), initial=0.0))
                interior_in = sum(
                    1 for r in solution.regions
                    if r.region.slack(x).size == 0 or r.region.slack(x).min() > BND_TOL
                )
                overlaps += interior_in != 1
            g_region = gradient_region_closed_form(problem, reg, x)
            g_mult = gradient_from_multipliers(problem, np.maximum(sol.lambda_star, 0.0))
            g_gen = gradient_generic(hooks, x, sol.z_star, sol.lambda_star, sol.active_set)
            route = max(route, np.max(np.abs(g_region - g_mult)), np.max(np.abs(g_region - g_gen)),
                        np.max(np.abs(g_mult - g_gen)))
            grads.append(g_region)
            slack = reg.region.slack(x)
            if slack.size == 0 or slack.min() > FD_MARGIN:
                g_fd = finite_difference_gradient(lambda y: value_at(problem, y), x, FD_STEP)
                fd = max(fd, np.max(np.abs(g_fd - g_region)))
                fd_count += 1
        report.add("oracle_z", dz, AGREE_TOL, f"{len(inner)} interior samples")
        if skip_licq:
            report.skip("oracle_lambda", AGREE_TOL, no_licq)
            report.skip("partition", 0, no_licq)
        elif regular_count:
            report.add("oracle_lambda", dl, AGREE_TOL, f"{regular_count} LICQ points")
            report.add("partition", overlaps, 0)
        else:
            report.skip("oracle_lambda", AGREE_TOL, "no sample satisfies LICQ")
            report.skip("partition", 0, "no sample satisfies LICQ")
        report.add("route_agreement", route, ROUTE_TOL)
        if fd_count:
            report.add("fd_agreement", fd, AGREE_TOL, f"{fd_count} points")
        else:
            report.skip("fd_agreement", AGREE_TOL, "no sample far enough from a facet")
        worst = -math.inf
        for _ in range(samples):
            a, b = rng.integers(len(inner), size=2)
            (x1, _), (x2, _) = inner[a], inner[b]
            worst = max(worst, -float((grads[a] - grads[b]) @ (x1 - x2)))
        report.add("monotonicity", max(worst, 0.0), CONVEXITY_SLACK)

    # continuity across neighbouring regions
    if skip_licq:
        report.skip("continuity", CONT_TOL, no_licq)
    elif len(solution.regions) < 2 or not solution.adjacency:
        report.skip("continuity", CONT_TOL, "fewer than two neighbouring regions")
    else:
        worst, used = 0.0, 0
        point_filter = None if licq is Licq.CERTIFIED else regular
        for k, pair in enumerate(solution.adjacency):
            try:
                worst = max(worst, check_gradient_continuity(solution, pair, 20, seed + k,
                                                             point_filter=point_filter))
                used += 1
            except NoSharedBoundary:
                continue
        if used:
            report.add("continuity", worst, CONT_TOL, f"{used} region pairs")
        else:
            report.skip("continuity", CONT_TOL, "no shared boundary inside the feasible set")
    return report
