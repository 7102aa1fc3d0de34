import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lambdarr import oracle
from lambdarr.data import Dataset, DataError, Schema
from lambdarr.estimate import covariance, empirical_joint
from lambdarr.kron import JointScheme
from lambdarr.randomize import (
    SeedSpec,
    randomize_codes,
    randomize_dataset,
    randomize_record,
    transform_numeric,
)

SCHEMA = Schema.from_dict({
    "attributes": [
        {"name": "colour", "categories": ["red", "green", "blue"]},
        {"name": "income", "type": "numeric"},
        {"name": "size", "categories": ["S", "M", "L", "XL"]},
    ]
})


def uniform_codes(n, shape, seed=0):
    rng = np.random.default_rng(seed)
    return np.column_stack([rng.integers(0, k, n) for k in shape])


def test_seed_validation():
    with pytest.raises(ValueError):
        SeedSpec(-1)
    with pytest.raises(ValueError):
        SeedSpec(2**64)
    SeedSpec(2**64 - 1)


def test_identity_scheme_keeps_records():
    s = JointScheme.from_lambdas([1.0, 1.0], [3, 4])
    codes = uniform_codes(1000, s.shape)
    np.testing.assert_array_equal(randomize_codes(s, codes, SeedSpec(1)), codes)
    assert randomize_record(s, (2, 3), SeedSpec(1), 17) == (2, 3)


def test_empty():
    s = JointScheme.from_lambdas([0.5], [3])
    assert randomize_codes(s, np.zeros((0, 1), dtype=int), SeedSpec(1)).shape == (0, 1)
    data = Dataset(SCHEMA, np.zeros((0, 2)), np.zeros((0, 1)))
    out = randomize_dataset(SCHEMA.scheme([0.5, 0.5, 0.5]), data, SeedSpec(3), [0.5])
    assert len(out) == 0


def test_shape_errors():
    s = JointScheme.from_lambdas([0.5, 0.5], [3, 4])
    with pytest.raises(ValueError):
        randomize_codes(s, np.zeros((5, 3), dtype=int), SeedSpec(1))
    with pytest.raises(ValueError, match="range"):
        randomize_codes(s, [[0, 4]], SeedSpec(1))


class TestDeterminism:
    scheme = JointScheme.from_lambdas([0.3, 0.6, 0.5], [5, 3, 4])
    codes = uniform_codes(50_000, (5, 3, 4), seed=9)

    def test_same_seed_same_output(self):
        a = randomize_codes(self.scheme, self.codes, SeedSpec(123))
        b = randomize_codes(self.scheme, self.codes, SeedSpec(123))
        np.testing.assert_array_equal(a, b)
        c = randomize_codes(self.scheme, self.codes, SeedSpec(124))
        assert (a != c).any()

    @pytest.mark.parametrize("chunk_size, workers", [(1000, 1), (7777, 4), (1 << 20, 1), (333, 8)])
    def test_independent_of_chunking_and_threads(self, chunk_size, workers):
        base = randomize_codes(self.scheme, self.codes, SeedSpec(123))
        other = randomize_codes(self.scheme, self.codes, SeedSpec(123), chunk_size=chunk_size, workers=workers)
        np.testing.assert_array_equal(base, other)

    def test_local_equals_central(self):
        central = randomize_codes(self.scheme, self.codes[:200], SeedSpec(42))
        local = [randomize_record(self.scheme, tuple(r), SeedSpec(42), i) for i, r in enumerate(self.codes[:200])]
        np.testing.assert_array_equal(central, np.array(local))

    def test_offset_slices(self):
        full = randomize_codes(self.scheme, self.codes, SeedSpec(5))
        tail = randomize_codes(self.scheme, self.codes[1000:2000], SeedSpec(5), start=1000)
        np.testing.assert_array_equal(full[1000:2000], tail)


def test_record_identity_probability():
    # probability a record survives unchanged is the product of diagonals (0.63 here)
    s = JointScheme.from_lambdas([0.8, 0.4], [2, 2])
    n = 200_000
    out = randomize_codes(s, np.zeros((n, 2), dtype=int), SeedSpec(2024))
    p_hat = np.mean((out == 0).all(axis=1))
    sigma = np.sqrt(0.63 * 0.37 / n)
    assert abs(p_hat - s.diagonal_truthfulness()) < 3 * sigma


def test_per_attribute_transitions():
    s = JointScheme.from_lambdas([0.3, 0.7], [3, 4])
    n = 100_000
    codes = uniform_codes(n, s.shape, seed=1)
    out = randomize_codes(s, codes, SeedSpec(77))
    for a, f in enumerate(s.factors):
        for u in range(f.size):
            rows = out[codes[:, a] == u, a]
            for v in range(f.size):
                p = f.entry(u, v)
                sigma = np.sqrt(p * (1 - p) / rows.size)
                assert abs(np.mean(rows == v) - p) < 3 * sigma, (a, u, v)


def test_uniform_stays_uniform():
    s = JointScheme.from_lambdas([0.5, 0.5], [3, 4])
    n = 100_000
    out = randomize_codes(s, uniform_codes(n, s.shape, seed=4), SeedSpec(8))
    for a, k in enumerate(s.shape):
        freq = np.bincount(out[:, a], minlength=k) / n
        sigma = np.sqrt((1 / k) * (1 - 1 / k) / n)
        assert (np.abs(freq - 1 / k) < 3 * sigma).all()


def test_matches_kronecker_row():
    from scipy import stats

    s = JointScheme.from_lambdas([0.6, 0.7, 0.4], [3, 2, 4])
    record = (2, 0, 1)
    n = 200_000
    out = randomize_codes(s, np.tile(record, (n, 1)), SeedSpec(31337))
    observed = empirical_joint(out, s.shape).ravel() * n
    row = oracle.dense_scheme(s)[np.ravel_multi_index(record, s.shape)]
    assert stats.chisquare(observed, row * n).pvalue > 0.01


class TestNumeric:
    def test_identity(self):
        x = np.array([1.0, 5.0, -2.0])
        np.testing.assert_array_equal(transform_numeric(1.0, x), x)

    def test_example(self):
        np.testing.assert_allclose(transform_numeric(0.1, [0.0, 10.0]), [4.5, 5.5], atol=1e-14)

    @settings(max_examples=100, deadline=None)
    @given(lam=st.floats(0.01, 1.0), seed=st.integers(0, 2**32 - 1), a=st.floats(-3, 3), b=st.floats(-3, 3))
    def test_linear_and_mean_preserving(self, lam, seed, a, b):
        rng = np.random.default_rng(seed)
        x, y = rng.normal(size=(2, 20))
        np.testing.assert_allclose(
            transform_numeric(lam, a * x + b * y), a * transform_numeric(lam, x) + b * transform_numeric(lam, y),
            rtol=0, atol=1e-12,
        )
        assert transform_numeric(lam, x).mean() == pytest.approx(x.mean(), abs=1e-12)
        assert np.var(transform_numeric(lam, x)) == pytest.approx(lam**2 * np.var(x), abs=1e-10)

    def test_matches_dense_matrix(self):
        x = np.random.default_rng(0).normal(size=7)
        np.testing.assert_allclose(transform_numeric(0.35, x), oracle.dense_lambda(0.35, 7) @ x, atol=1e-14)

    def test_covariance_shrinks(self):
        rng = np.random.default_rng(2)
        x = rng.normal(size=50)
        y = x + rng.normal(size=50)
        got = covariance(transform_numeric(0.5, x), transform_numeric(0.4, y))
        assert got == pytest.approx(0.2 * covariance(x, y), abs=1e-12)


class TestDataset:
    def make(self, n=500):
        rng = np.random.default_rng(0)
        codes = uniform_codes(n, SCHEMA.shape)
        return Dataset(SCHEMA, codes, rng.normal(50, 10, (n, 1)))

    def test_central(self):
        data = self.make()
        scheme = SCHEMA.scheme({"colour": 0.5, "income": 0.3, "size": 0.9})
        out = randomize_dataset(scheme, data, SeedSpec(1), [0.3])
        assert len(out) == len(data)
        np.testing.assert_array_equal(out.codes, randomize_codes(scheme, data.codes, SeedSpec(1)))
        np.testing.assert_allclose(out.values[:, 0], transform_numeric(0.3, data.values[:, 0]))

    def test_local_rejects_numeric(self):
        data = self.make()
        scheme = SCHEMA.scheme([0.5, 0.3, 0.9])
        with pytest.raises(DataError, match="categorize"):
            randomize_dataset(scheme, data, SeedSpec(1), [0.3], mode="local-simulated")

    def test_local_equals_central_categorical(self):
        schema = Schema.from_dict({"attributes": [{"name": "a", "categories": ["x", "y", "z"]}]})
        data = Dataset(schema, uniform_codes(300, (3,)), np.zeros((300, 0)))
        scheme = schema.scheme([0.4])
        a = randomize_dataset(scheme, data, SeedSpec(6), mode="central")
        b = randomize_dataset(scheme, data, SeedSpec(6), mode="local-simulated")
        np.testing.assert_array_equal(a.codes, b.codes)

    def test_bad_mode(self):
        with pytest.raises(ValueError):
            randomize_dataset(SCHEMA.scheme([0.5, 0.3, 0.9]), self.make(), SeedSpec(1), [0.3], mode="remote")

    def test_mismatched_scheme(self):
        with pytest.raises(DataError):
            randomize_dataset(JointScheme.from_lambdas([0.5], [3]), self.make(), SeedSpec(1), [0.3])
