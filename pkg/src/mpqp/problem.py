"""Problem data for  min_z 1/2 z'Hz  s.t.  G z <= W + S x, and its JSON form.

Sign convention used everywhere in the package: the constraint residual is

    g(z, x) = G z - S x - W  <=  0.

Active sets are tuples of 0-based constraint indices internally. The JSON
and CLI layers convert to and from 1-based indices.
"""

import itertools
import json
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DimensionMismatch, ParseError
from .linalg import cholesky_solve, cholesky_spd, row_rank
from .tolerances import FEAS_TOL, LICQ_TOL

_FIELDS = ("s", "m", "n", "H", "G", "W", "S")


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class MpqpProblem:
    """A validated strictly convex multi-parametric QP.

    Construction checks dimensions, finiteness, symmetry and positive
    definiteness of H, and caches the Cholesky factor of H.
    """

    H: np.ndarray
    G: np.ndarray
    W: np.ndarray
    S: np.ndarray
    chol_H: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        H = np.array(self.H, dtype=float)
        if H.ndim != 2 or H.shape[0] != H.shape[1]:
            raise DimensionMismatch(f"H must be square, got shape {H.shape}")
        s = H.shape[0]
        W = np.array(self.W, dtype=float).reshape(-1)
        m = W.shape[0]
        G = np.array(self.G, dtype=float)
        if G.size == 0:
            G = G.reshape(m, s)
        S = np.array(self.S, dtype=float)
        if S.ndim != 2:
            raise DimensionMismatch(f"S must be a matrix, got shape {S.shape}")
        if G.shape != (m, s):
            raise DimensionMismatch(f"G has shape {G.shape}, expected ({m}, {s})")
        if S.shape[0] != m:
            raise DimensionMismatch(f"S has {S.shape[0]} rows, expected {m}")
        for name, a in (("H", H), ("G", G), ("W", W), ("S", S)):
            if not np.all(np.isfinite(a)):
                raise ValueError(f"{name} has non-finite entries")
        L = cholesky_spd(H)
        for name, a in (("H", H), ("G", G), ("W", W), ("S", S), ("chol_H", L)):
            object.__setattr__(self, name, _frozen(a))

    @property
    def s(self):
        return self.H.shape[0]

    @property
    def m(self):
        return self.G.shape[0]

    @property
    def n(self):
        return self.S.shape[1]

    def solve_H(self, B):
        """H^{-1} B using the cached factor."""
        return cholesky_solve(self.chol_H, B)

    def rhs(self, x):
        """W + S x."""
        return self.W + self.S @ np.asarray(x, dtype=float)

    def residual(self, z, x):
        """g(z, x) = G z - S x - W."""
        return self.G @ np.asarray(z, dtype=float) - self.rhs(x)

    def objective(self, z):
        z = np.asarray(z, dtype=float)
        return 0.5 * float(z @ self.H @ z)

    def dual_hessian(self):
        """G H^{-1} G^T."""
        return self.G @ self.solve_H(self.G.T)

    def check_parameter(self, x):
        x = np.asarray(x, dtype=float).reshape(-1)
        if x.shape[0] != self.n:
            raise DimensionMismatch(f"parameter has length {x.shape[0]}, expected {self.n}")
        if not np.all(np.isfinite(x)):
            raise ValueError("parameter has non-finite entries")
        return x

    def __eq__(self, other):
        if not isinstance(other, MpqpProblem):
            return NotImplemented
        return all(
            getattr(self, k).shape == getattr(other, k).shape
            and np.array_equal(getattr(self, k), getattr(other, k))
            for k in ("H", "G", "W", "S")
        )

    __hash__ = None


def validate(problem):
    """Re-check a problem's invariants. Idempotent: returns an equal problem."""
    return MpqpProblem(problem.H, problem.G, problem.W, problem.S)


def active_set(indices, m):
    """Normalize constraint indices (0-based) into a sorted, duplicate-free tuple."""
    idx = [int(i) for i in indices]
    out = tuple(sorted(set(idx)))
    if len(out) != len(idx):
        raise ValueError(f"duplicate indices in active set {idx}")
    if out and (out[0] < 0 or out[-1] >= m):
        raise ValueError(f"active set {out} out of range for m={m}")
    return out


def format_active_set(E):
    """Human-facing 1-based rendering, e.g. ``{1;3}``."""
    return "{" + ";".join(str(i + 1) for i in E) + "}"


def is_feasible_point(problem, x, z, feas_tol=FEAS_TOL):
    """True iff G z - S x - W <= feas_tol component-wise."""
    g = problem.residual(z, problem.check_parameter(x))
    return bool(g.size == 0 or g.max() <= feas_tol)


@dataclass(frozen=True)
class GenericProblemHooks:
    """Evaluators for  min_z f(z, x)  s.t.  g(z, x) <= 0.

    ``eval_dfdx`` returns the n-vector (df/dx)^T; ``eval_dgdx`` returns the
    m x n Jacobian dg/dx.
    """

    s: int
    m: int
    n: int
    eval_f: Callable
    eval_g: Callable
    eval_dfdx: Callable
    eval_dgdx: Callable
    thread_safe: bool = True


def mpqp_hooks(problem):
    """Hooks encoding an mpQP: f = 1/2 z'Hz, g = Gz - Sx - W."""
    S = problem.S
    return GenericProblemHooks(
        s=problem.s,
        m=problem.m,
        n=problem.n,
        eval_f=lambda z, x: problem.objective(z),
        eval_g=lambda z, x: problem.residual(z, x),
        eval_dfdx=lambda z, x: np.zeros(problem.n),
        eval_dgdx=lambda z, x: -S,
    )


# -- serialization -----------------------------------------------------------

def problem_to_dict(problem):
    return {
        "s": problem.s,
        "m": problem.m,
        "n": problem.n,
        "H": problem.H.tolist(),
        "G": problem.G.tolist(),
        "W": problem.W.tolist(),
        "S": problem.S.tolist(),
    }


def save_problem(problem):
    return json.dumps(problem_to_dict(problem))


def _numbers(value, name, shape):
    """Convert nested lists to a float array of the declared shape."""

    def check(v, path):
        if isinstance(v, list):
            for i, item in enumerate(v):
                check(item, f"{path}[{i}]")
        elif isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ParseError(f"expected a number at {path}, got {type(v).__name__}", field=name)
        elif not np.isfinite(v):
            raise ParseError(f"non-finite number at {path}", field=name)

    if not isinstance(value, list):
        raise ParseError("expected an array", field=name)
    check(value, name)
    try:
        a = np.array(value, dtype=float)
    except ValueError as exc:
        raise ParseError(f"ragged array: {exc}", field=name) from None
    if a.size == 0 and int(np.prod(shape)) == 0:
        return a.reshape(shape)
    if a.shape != shape:
        raise ParseError(f"shape {a.shape} does not match declared {shape}", field=name)
    return a


def problem_from_dict(doc):
    if not isinstance(doc, dict):
        raise ParseError("problem document must be a JSON object")
    for key in _FIELDS:
        if key not in doc:
            raise ParseError("missing required field", field=key)
    dims = {}
    for key in ("s", "m", "n"):
        v = doc[key]
        if isinstance(v, bool) or not isinstance(v, int) or v < 0:
            raise ParseError("expected a non-negative integer", field=key)
        dims[key] = v
    s, m, n = dims["s"], dims["m"], dims["n"]
    return MpqpProblem(
        H=_numbers(doc["H"], "H", (s, s)),
        G=_numbers(doc["G"], "G", (m, s)),
        W=_numbers(doc["W"], "W", (m,)),
        S=_numbers(doc["S"], "S", (m, n)),
    )


def load_problem(text):
    """Parse and validate a JSON problem document."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", line=exc.lineno) from None
    return problem_from_dict(doc)


def gram_condition(problem, max_size=None):
    """Largest 2-norm condition number of G_E H^-1 G_E' over independent
    row subsets E with |E| <= max_size (default min(m, s))."""
    max_size = min(problem.m, problem.s) if max_size is None else max_size
    D = problem.dual_hessian()
    worst = 1.0
    for size in range(1, max_size + 1):
        for E in itertools.combinations(range(problem.m), size):
            if row_rank(problem.G[list(E)], LICQ_TOL) < size:
                continue
            worst = max(worst, float(np.linalg.cond(D[np.ix_(E, E)])))
    return worst


def random_problem(rng, s, m, n, w_low=0.5, w_high=1.5, max_gram_cond=None):
    """Random mpQP with H = M'M + I and W > 0, so x = 0 is strictly feasible.

    With ``max_gram_cond`` set, draws are repeated until every independent
    active-set Gram matrix has condition number at most that bound.
    """
    for _ in range(1000):
        M = rng.standard_normal((s, s))
        problem = MpqpProblem(
            H=M.T @ M + np.eye(s),
            G=rng.standard_normal((m, s)),
            W=rng.uniform(w_low, w_high, size=m),
            S=rng.standard_normal((m, n)),
        )
        if max_gram_cond is None or gram_condition(problem) <= max_gram_cond:
            return problem
    raise RuntimeError(f"no draw met max_gram_cond={max_gram_cond} in 1000 tries")
