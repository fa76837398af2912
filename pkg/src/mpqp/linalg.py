"""Small dense linear algebra: Cholesky, SPD solves and a numerical rank test.

Matrices are plain 2-D float64 numpy arrays. Only the factorizations are
hand-written; products and norms use numpy.
"""

import numpy as np

from .errors import DimensionMismatch, NotPositiveDefinite, NotSymmetric
from .tolerances import LICQ_TOL, PD_TOL, SYM_TOL


def _as_square(A):
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    return A


def cholesky_spd(A, sym_tol=SYM_TOL, pd_tol=PD_TOL):
    """Return lower-triangular L with L @ L.T == A.

    Raises NotSymmetric if A deviates from A.T by more than ``sym_tol``
    relative to max|A|, and NotPositiveDefinite if any pivot falls to
    ``pd_tol`` times the largest diagonal entry or below.
    """
    A = _as_square(A)
    n = A.shape[0]
    if n == 0:
        return np.zeros((0, 0))
    scale = np.max(np.abs(A))
    if np.max(np.abs(A - A.T)) > sym_tol * scale:
        raise NotSymmetric("matrix is not symmetric")
    A = 0.5 * (A + A.T)
    max_diag = np.max(np.diag(A))
    if max_diag <= 0.0:
        raise NotPositiveDefinite("matrix has no positive diagonal entry")
    threshold = pd_tol * max_diag

    L = np.zeros_like(A)
    for j in range(n):
        pivot = A[j, j] - L[j, :j] @ L[j, :j]
        if pivot <= threshold:
            raise NotPositiveDefinite(f"pivot {pivot:.3e} at column {j} is not positive")
        L[j, j] = np.sqrt(pivot)
        if j + 1 < n:
            L[j + 1:, j] = (A[j + 1:, j] - L[j + 1:, :j] @ L[j, :j]) / L[j, j]
    return L


def forward_solve(L, B):
    """Solve L Y = B for lower-triangular L."""
    B = np.asarray(B, dtype=float)
    n = L.shape[0]
    if B.shape[0] != n:
        raise DimensionMismatch(f"right-hand side has {B.shape[0]} rows, expected {n}")
    Y = np.array(B, dtype=float, copy=True)
    for i in range(n):
        Y[i] = (Y[i] - L[i, :i] @ Y[:i]) / L[i, i]
    return Y


def back_solve_transposed(L, Y):
    """Solve L^T X = Y for lower-triangular L."""
    X = np.array(Y, dtype=float, copy=True)
    for i in range(L.shape[0] - 1, -1, -1):
        X[i] = (X[i] - L[i + 1:, i] @ X[i + 1:]) / L[i, i]
    return X


def cholesky_solve(L, B):
    """Solve (L L^T) X = B given the lower Cholesky factor L."""
    return back_solve_transposed(L, forward_solve(L, B))


def solve_spd(A, B):
    """Solve A X = B for symmetric positive definite A.

    B may be a vector or a matrix; the result has the same shape.
    """
    return cholesky_solve(cholesky_spd(A), B)


def row_rank(M, tol=LICQ_TOL):
    """Numerical rank of M by Gaussian elimination with complete pivoting.

    Pivots smaller than ``tol`` times the first (largest) pivot count as zero.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    M = np.array(M, dtype=float)
    if M.ndim != 2:
        raise DimensionMismatch(f"expected a matrix, got shape {M.shape}")
    rows, cols = M.shape
    if rows == 0 or cols == 0:
        return 0
    first = None
    rank = 0
    for k in range(min(rows, cols)):
        sub = np.abs(M[k:, k:])
        i, j = np.unravel_index(np.argmax(sub), sub.shape)
        pivot = sub[i, j]
        if first is None:
            first = pivot
            if first == 0.0:
                return 0
        if pivot <= tol * first:
            break
        i += k
        j += k
        M[[k, i]] = M[[i, k]]
        M[:, [k, j]] = M[:, [j, k]]
        M[k + 1:, k:] -= np.outer(M[k + 1:, k] / M[k, k], M[k, k:])
        rank += 1
    return rank
