import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lambdarr import oracle
from lambdarr.matrix import (
    DenseBistochastic,
    LambdaMatrix,
    extract_identity_weight,
    solve_lambda,
    strength_of,
)

lambdas = st.floats(min_value=0.05, max_value=1.0)
sizes = st.integers(min_value=2, max_value=50)


def test_identity_when_lambda_is_one():
    m = LambdaMatrix(1.0, 5)
    assert m.entry(0, 0) == 1.0
    assert m.entry(0, 3) == 0.0
    v = np.arange(5.0)
    np.testing.assert_array_equal(m.apply(v), v)
    np.testing.assert_array_equal(m.apply_inverse(v), v)


def test_entries():
    m = LambdaMatrix(0.9, 5)
    assert m.entry(2, 2) == pytest.approx(0.92, abs=1e-15)
    assert m.entry(2, 1) == pytest.approx(0.02, abs=1e-15)


@pytest.mark.parametrize(
    "lam, expected",
    [(0.8, [[0.9, 0.1], [0.1, 0.9]]), (0.4, [[0.7, 0.3], [0.3, 0.7]])],
)
def test_dense_two_binary_example(lam, expected):
    np.testing.assert_allclose(LambdaMatrix(lam, 2).dense(), expected, atol=1e-15)


def test_dense_identity():
    np.testing.assert_array_equal(LambdaMatrix(1.0, 3).dense(), np.eye(3))


def test_dense_cap():
    with pytest.raises(ValueError, match="cap"):
        LambdaMatrix(0.5, 100).dense(cap=1000)


@pytest.mark.parametrize("lam, n", [(0.0, 3), (-0.1, 3), (1.5, 3), (0.5, 1), (float("nan"), 3)])
def test_rejects_bad_parameters(lam, n):
    with pytest.raises(ValueError):
        LambdaMatrix(lam, n)


def test_lambda_guard_is_configurable():
    with pytest.raises(ValueError, match="guard"):
        LambdaMatrix(1e-8, 4)
    m = LambdaMatrix(1e-8, 4, min_lambda=0.0)
    assert m.lam == 1e-8


def test_apply_example():
    np.testing.assert_allclose(LambdaMatrix(0.4, 3).apply([1, 0, 0]), [0.6, 0.2, 0.2], atol=1e-15)


def test_apply_inverse_example():
    np.testing.assert_allclose(LambdaMatrix(0.4, 3).apply_inverse([0.6, 0.2, 0.2]), [1, 0, 0], atol=1e-15)


def test_inverse_of_half():
    m = LambdaMatrix(0.5, 2)
    inv = m.apply_inverse(np.eye(2), axis=0)
    np.testing.assert_allclose(inv, [[1.5, -0.5], [-0.5, 1.5]], atol=1e-15)
    np.testing.assert_allclose(np.array([[0.75, 0.25], [0.25, 0.75]]) @ inv, np.eye(2), atol=1e-15)
    np.testing.assert_allclose(m.dense_inverse(), inv, atol=1e-15)


def test_dimension_mismatch():
    with pytest.raises(ValueError, match="dimension"):
        LambdaMatrix(0.5, 3).apply([1.0, 2.0])
    with pytest.raises(ValueError, match="dimension"):
        LambdaMatrix(0.5, 3).apply_inverse([1.0, 2.0])


def test_uniform_is_fixed():
    for n in (2, 3, 7, 10):
        u = np.full(n, 1.0 / n)
        np.testing.assert_allclose(LambdaMatrix(0.37, n).apply(u), u, rtol=0, atol=1e-16)
        np.testing.assert_allclose(LambdaMatrix(0.37, n).apply(np.ones(n)), np.ones(n), rtol=0, atol=1e-15)


@settings(max_examples=200, deadline=None)
@given(lam=lambdas, n=sizes, seed=st.integers(0, 2**32 - 1))
def test_round_trip(lam, n, seed):
    v = np.random.default_rng(seed).normal(size=n)
    m = LambdaMatrix(lam, n)
    np.testing.assert_allclose(m.apply_inverse(m.apply(v)), v, rtol=0, atol=1e-10)
    assert m.apply(v).sum() == pytest.approx(v.sum(), abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(lam=lambdas, n=st.integers(2, 20), seed=st.integers(0, 2**32 - 1))
def test_matches_dense_oracle(lam, n, seed):
    v = np.random.default_rng(seed).normal(size=n)
    m = LambdaMatrix(lam, n)
    dense = oracle.dense_lambda(lam, n)
    np.testing.assert_allclose(m.apply(v), dense @ v, rtol=0, atol=1e-10)
    np.testing.assert_allclose(m.apply_inverse(v), oracle.dense_invert(dense) @ v, rtol=0, atol=1e-10)
    assert oracle.dense_bistochastic_check(m.dense(), tol=1e-12)


def test_apply_along_axis_matches_dense():
    rng = np.random.default_rng(3)
    t = rng.normal(size=(3, 4, 5))
    m = LambdaMatrix(0.3, 4)
    got = m.apply(t, axis=1)
    want = np.einsum("ij,ajb->aib", oracle.dense_lambda(0.3, 4), t)
    np.testing.assert_allclose(got, want, atol=1e-14)


class TestEntropy:
    def test_zero_at_identity(self):
        assert LambdaMatrix(1.0, 7).entropy_rate() == 0.0
        assert LambdaMatrix(1.0, 7).strength() == 0.0

    def test_lambda_point_two(self):
        m = LambdaMatrix(0.2, 5)
        # 0.36 on the diagonal, 0.16 elsewhere
        want = -(0.36 * math.log2(0.36) + 4 * 0.16 * math.log2(0.16))
        assert m.entropy_rate() == pytest.approx(want, abs=1e-12)
        assert m.entropy_rate() == pytest.approx(2.2227, abs=5e-5)
        assert round(100 * m.strength()) == 96

    def test_against_dense_row_entropy(self):
        m = LambdaMatrix(0.5, 4)
        assert m.entropy_rate() == pytest.approx(oracle.dense_entropy_rate(m.dense()), abs=1e-12)
        assert m.entropy_rate() == pytest.approx(1.5488, abs=5e-5)

    @pytest.mark.parametrize("lam, beta", [(0.1, 0.9886), (0.9, 0.2421)])
    def test_strength(self, lam, beta):
        assert LambdaMatrix(lam, 5).strength() == pytest.approx(beta, abs=5e-5)

    @settings(max_examples=100, deadline=None)
    @given(a=st.floats(1e-4, 1.0), b=st.floats(1e-4, 1.0), n=sizes)
    def test_monotone(self, a, b, n):
        if abs(a - b) < 1e-9:
            return
        lo, hi = min(a, b), max(a, b)
        assert LambdaMatrix(lo, n).entropy_rate() > LambdaMatrix(hi, n).entropy_rate()

    def test_limit_towards_zero(self):
        assert LambdaMatrix(1e-9, 6, min_lambda=0).entropy_rate() == pytest.approx(math.log2(6), abs=1e-6)


class TestSolveLambda:
    def test_zero_budget(self):
        assert solve_lambda(0.0, 4) == 1.0

    def test_inverse_of_entropy_example(self):
        assert solve_lambda(0.957, 5) == pytest.approx(0.2, abs=0.01)

    @pytest.mark.parametrize("beta", [0.01, 0.25, 0.5, 0.9, 0.999])
    @pytest.mark.parametrize("n", [2, 4, 17])
    def test_round_trip(self, beta, n):
        lam = solve_lambda(beta, n)
        assert 0 < lam <= 1
        assert abs(strength_of(lam, n) - beta) <= 1e-9

    @pytest.mark.parametrize("beta", [1.0, 1.2, -0.1])
    def test_rejects(self, beta):
        with pytest.raises(ValueError):
            solve_lambda(beta, 5)

    def test_unreachable_above_guard(self):
        with pytest.raises(ValueError, match="guard"):
            solve_lambda(1 - 1e-13, 3)


class TestExtraction:
    def test_from_lambda_matrix(self):
        d = LambdaMatrix(0.6, 3).dense()
        lam, r = extract_identity_weight(d)
        assert lam == pytest.approx(0.6 + 0.4 / 3, abs=1e-15)
        np.testing.assert_array_equal(np.diag(r), 0.0)
        np.testing.assert_allclose(lam * np.eye(3) + (1 - lam) * r, d, rtol=0, atol=1e-12)
        assert oracle.dense_bistochastic_check(r, tol=1e-12)

    def test_two_by_two_gives_swap(self):
        lam, r = extract_identity_weight([[0.9, 0.1], [0.1, 0.9]])
        assert lam == 0.9
        np.testing.assert_allclose(r, [[0, 1], [1, 0]], atol=1e-12)

    def test_uniform(self):
        lam, r = extract_identity_weight(np.full((4, 4), 0.25))
        assert lam == 0.25
        assert oracle.dense_bistochastic_check(r, tol=1e-12)

    def test_identity_is_degenerate(self):
        assert extract_identity_weight(np.eye(3)) == (1.0, None)

    def test_zero_diagonal_rejected(self):
        with pytest.raises(ValueError, match="diagonal"):
            extract_identity_weight([[0.0, 1.0], [1.0, 0.0]])

    def test_rejects_non_bistochastic(self):
        with pytest.raises(ValueError, match="row 0"):
            extract_identity_weight([[0.9, 0.2], [0.1, 0.8]])

    @settings(max_examples=50, deadline=None)
    @given(n=st.integers(2, 12), seed=st.integers(0, 2**32 - 1))
    def test_random_round_trip(self, n, seed):
        rng = np.random.default_rng(seed)
        w = rng.dirichlet(np.ones(5))
        d = w[0] * np.full((n, n), 1.0 / n)
        for x in w[1:]:
            d = d + x * np.eye(n)[rng.permutation(n)]
        lam, r = extract_identity_weight(d)
        assert lam > 0
        if r is not None:
            assert oracle.dense_bistochastic_check(r, tol=1e-9)
            assert np.isclose(np.diag(r), 0.0, atol=1e-15).any()
            np.testing.assert_allclose(lam * np.eye(n) + (1 - lam) * r, d, rtol=0, atol=1e-12)


def test_dense_bistochastic_from_csv(tmp_path):
    path = tmp_path / "p.csv"
    path.write_text("0.9,0.1\n0.1,0.9\n")
    d = DenseBistochastic.from_csv(path)
    assert d.size == 2 and d.is_positive
    assert extract_identity_weight(d)[0] == 0.9


def test_dense_bistochastic_input_tolerance():
    DenseBistochastic([[0.5 + 1e-10, 0.5], [0.5, 0.5 - 1e-10]])
    with pytest.raises(ValueError, match="sums"):
        DenseBistochastic([[0.5 + 1e-6, 0.5], [0.5, 0.5]])
