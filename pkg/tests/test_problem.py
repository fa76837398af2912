import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import P1_JSON, make_p1
from mpqp.errors import DimensionMismatch, NotPositiveDefinite, NotSymmetric, ParseError
from mpqp.problem import (
    MpqpProblem,
    active_set,
    format_active_set,
    gram_condition,
    is_feasible_point,
    load_problem,
    mpqp_hooks,
    random_problem,
    save_problem,
    validate,
)


class TestValidation:
    def test_p1_valid(self, p1):
        assert (p1.s, p1.m, p1.n) == (1, 1, 1)
        np.testing.assert_array_equal(p1.chol_H, [[1.0]])

    def test_indefinite_hessian(self):
        with pytest.raises(NotPositiveDefinite):
            MpqpProblem(H=[[1.0, 2.0], [2.0, 1.0]], G=np.zeros((0, 2)), W=[], S=np.zeros((0, 1)))

    def test_asymmetric_hessian(self):
        with pytest.raises(NotSymmetric):
            MpqpProblem(H=[[1.0, 0.5], [0.0, 1.0]], G=np.zeros((0, 2)), W=[], S=np.zeros((0, 1)))

    def test_w_length_mismatch(self):
        with pytest.raises(DimensionMismatch):
            MpqpProblem(H=np.eye(2), G=np.ones((2, 2)), W=np.ones(3), S=np.ones((2, 1)))

    def test_s_rows_mismatch(self):
        with pytest.raises(DimensionMismatch):
            MpqpProblem(H=np.eye(2), G=np.ones((2, 2)), W=np.ones(2), S=np.ones((3, 1)))

    def test_non_finite(self):
        with pytest.raises(ValueError):
            MpqpProblem(H=[[1.0]], G=[[np.inf]], W=[0.0], S=[[1.0]])

    def test_validate_idempotent(self, p2):
        once = validate(p2)
        assert validate(once) == once == p2

    def test_data_is_read_only(self, p1):
        with pytest.raises(ValueError):
            p1.H[0, 0] = 2.0


class TestFeasibility:
    def test_tight(self, p1):
        assert is_feasible_point(p1, [1.0], [1.0])

    def test_violated(self, p1):
        assert not is_feasible_point(p1, [1.0], [0.0])

    def test_strict_slack(self, p2):
        assert is_feasible_point(p2, [0.0, 0.0], [-1.0, -1.0])

    def test_residual_sign(self, p1):
        # g = G z - S x - W = -0 + 1 - 0
        np.testing.assert_allclose(p1.residual([0.0], [1.0]), [1.0])


class TestActiveSet:
    def test_normalizes(self):
        assert active_set([2, 0], 3) == (0, 2)
        assert active_set(iter([1]), 3) == (1,)

    def test_rejects_duplicates_and_range(self):
        with pytest.raises(ValueError):
            active_set([1, 1], 3)
        with pytest.raises(ValueError):
            active_set([3], 3)

    def test_format(self):
        assert format_active_set(()) == "{}"
        assert format_active_set((0, 2)) == "{1;3}"


class TestSerialization:
    def test_load_p1(self):
        assert load_problem(P1_JSON) == make_p1()

    def test_missing_field(self):
        doc = json.loads(P1_JSON)
        del doc["H"]
        with pytest.raises(ParseError) as err:
            load_problem(json.dumps(doc))
        assert err.value.field == "H"
        assert "'H'" in str(err.value)

    def test_indefinite_document(self):
        doc = json.loads(P1_JSON)
        doc.update(s=2, H=[[1, 2], [2, 1]], G=[[-1.0, 0.0]])
        with pytest.raises(NotPositiveDefinite):
            load_problem(json.dumps(doc))

    def test_bad_json_reports_line(self):
        with pytest.raises(ParseError) as err:
            load_problem('{\n"s": 1,\n"m": }')
        assert err.value.line == 3

    def test_wrong_shape(self):
        doc = json.loads(P1_JSON)
        doc["G"] = [[-1.0, 2.0]]
        with pytest.raises(ParseError) as err:
            load_problem(json.dumps(doc))
        assert err.value.field == "G"

    def test_non_numeric_entry(self):
        doc = json.loads(P1_JSON)
        doc["W"] = ["zero"]
        with pytest.raises(ParseError):
            load_problem(json.dumps(doc))

    def test_empty_constraints(self, unconstrained):
        back = load_problem(save_problem(unconstrained))
        assert back == unconstrained
        assert back.G.shape == (0, 2)


class TestHooks:
    def test_mpqp_hooks(self, p1):
        hooks = mpqp_hooks(p1)
        assert (hooks.s, hooks.m, hooks.n) == (1, 1, 1)
        np.testing.assert_array_equal(hooks.eval_dgdx([2.0], [2.0]), [[1.0]])
        np.testing.assert_array_equal(hooks.eval_dfdx([2.0], [2.0]), [0.0])
        assert hooks.eval_f([2.0], [2.0]) == 2.0


class TestRandomProblem:
    def test_well_conditioned_filter(self):
        rng = np.random.default_rng(0)
        p = random_problem(rng, 3, 6, 2, max_gram_cond=1e3)
        assert gram_condition(p) <= 1e3
        assert is_feasible_point(p, np.zeros(2), np.zeros(3))

    def test_gram_condition_of_identity(self, p2):
        assert gram_condition(p2) == pytest.approx(1.0)


@settings(max_examples=50)
@given(st.integers(0, 2**32 - 1), st.integers(1, 4), st.integers(0, 8), st.integers(1, 3))
def test_save_load_round_trip(seed, s, m, n):
    p = random_problem(np.random.default_rng(seed), s, m, n)
    back = load_problem(save_problem(p))
    assert back == p
    for name in ("H", "G", "W", "S"):
        assert getattr(back, name).tobytes() == getattr(p, name).tobytes()


@settings(max_examples=50)
@given(st.integers(0, 2**32 - 1), st.floats(0.0, 1.0), st.floats(0.0, 1.0))
def test_feasibility_monotone_in_tolerance(seed, tol_a, tol_b):
    rng = np.random.default_rng(seed)
    p = random_problem(rng, 2, 4, 2)
    x, z = rng.standard_normal(2), rng.standard_normal(2)
    lo, hi = sorted((tol_a, tol_b))
    if is_feasible_point(p, x, z, lo):
        assert is_feasible_point(p, x, z, hi)
