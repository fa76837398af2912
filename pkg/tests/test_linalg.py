import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mpqp.errors import DimensionMismatch, NotPositiveDefinite, NotSymmetric
from mpqp.linalg import cholesky_solve, cholesky_spd, row_rank, solve_spd
from mpqp.tolerances import FACTOR_TOL, SOLVE_TOL


class TestCholesky:
    def test_identity(self):
        np.testing.assert_array_equal(cholesky_spd(np.eye(2)), np.eye(2))

    def test_two_by_two(self):
        A = np.array([[4.0, 2.0], [2.0, 3.0]])
        L = cholesky_spd(A)
        np.testing.assert_allclose(L, [[2.0, 0.0], [1.0, np.sqrt(2.0)]], atol=1e-15)
        # reconstruction by explicit multiplication
        np.testing.assert_allclose(L @ L.T, A, atol=1e-14)

    def test_indefinite(self):
        with pytest.raises(NotPositiveDefinite):
            cholesky_spd(np.array([[1.0, 2.0], [2.0, 1.0]]))

    def test_not_symmetric(self):
        with pytest.raises(NotSymmetric):
            cholesky_spd(np.array([[2.0, 1.0], [0.0, 2.0]]))

    def test_tiny_asymmetry_accepted(self):
        A = np.array([[2.0, 1.0], [1.0 + 1e-14, 2.0]])
        L = cholesky_spd(A)
        np.testing.assert_allclose(L @ L.T, 0.5 * (A + A.T), atol=1e-14)

    def test_non_square(self):
        with pytest.raises(DimensionMismatch):
            cholesky_spd(np.ones((2, 3)))

    def test_non_finite(self):
        with pytest.raises(ValueError):
            cholesky_spd(np.array([[np.nan]]))

    def test_empty(self):
        assert cholesky_spd(np.zeros((0, 0))).shape == (0, 0)

    def test_result_is_lower_triangular(self):
        rng = np.random.default_rng(1)
        M = rng.standard_normal((4, 4))
        L = cholesky_spd(M.T @ M + np.eye(4))
        np.testing.assert_array_equal(np.triu(L, 1), 0.0)
        assert np.all(np.diag(L) > 0)


class TestSolve:
    def test_identity(self):
        B = np.array([[1.0, -2.0], [3.5, 0.25]])
        np.testing.assert_array_equal(solve_spd(np.eye(2), B), B)

    def test_scalar(self):
        np.testing.assert_allclose(solve_spd([[2.0]], [[6.0]]), [[3.0]])

    def test_two_by_two(self):
        A = np.array([[4.0, 2.0], [2.0, 3.0]])
        X = solve_spd(A, np.array([1.0, 0.0]))
        np.testing.assert_allclose(X, [0.375, -0.25], atol=1e-15)
        np.testing.assert_allclose(A @ X, [1.0, 0.0], atol=1e-15)

    def test_propagates_not_pd(self):
        with pytest.raises(NotPositiveDefinite):
            solve_spd(np.array([[1.0, 2.0], [2.0, 1.0]]), np.ones(2))

    def test_rhs_length_checked(self):
        with pytest.raises(DimensionMismatch):
            cholesky_solve(np.eye(2), np.ones(3))


class TestRowRank:
    @pytest.mark.parametrize("M, rank", [
        (np.eye(3), 3),
        ([[1.0, 2.0], [2.0, 4.0]], 1),
        ([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]], 2),
        (np.zeros((2, 3)), 0),
        (np.zeros((0, 3)), 0),
    ])
    def test_examples(self, M, rank):
        assert row_rank(M) == rank

    def test_near_dependence_below_tolerance(self):
        assert row_rank([[1.0, 0.0], [1.0, 1e-12]]) == 1
        assert row_rank([[1.0, 0.0], [1.0, 1e-6]]) == 2

    def test_tol_must_be_positive(self):
        with pytest.raises(ValueError):
            row_rank(np.eye(2), tol=0.0)


def _spd(seed, n):
    M = np.random.default_rng(seed).standard_normal((n, n))
    return M.T @ M + 1e-1 * np.eye(n)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 6))
def test_cholesky_reconstructs(seed, n):
    A = _spd(seed, n)
    L = cholesky_spd(A)
    assert np.max(np.abs(L @ L.T - A)) <= FACTOR_TOL * np.max(np.abs(A))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 6), st.integers(1, 3))
def test_solve_recovers_known_solution(seed, n, k):
    rng = np.random.default_rng(seed)
    A = _spd(seed, n)
    X0 = rng.standard_normal((n, k))
    X = solve_spd(A, A @ X0)
    residual = np.max(np.abs(A @ X - A @ X0))
    assert residual <= SOLVE_TOL * (np.max(np.abs(A)) * np.max(np.abs(X)) + np.max(np.abs(A @ X0)))
    np.testing.assert_allclose(X, X0, atol=1e-6)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 5), st.integers(1, 5))
def test_row_rank_matches_product_rank(seed, r, c):
    rng = np.random.default_rng(seed)
    k = int(rng.integers(0, min(r, c) + 1))
    M = rng.standard_normal((r, k)) @ rng.standard_normal((k, c))
    assert row_rank(M) == k
