"""Numeric kernel contracts: softmax, matmul, activations, rng, flatten."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from swarmsum.errors import (
    BadRangeError,
    EmptyInputError,
    LengthMismatchError,
    ShapeMismatchError,
)
from swarmsum.numcore import (
    ParamVector,
    RngStream,
    flatten,
    matmul,
    rand_uniform,
    sigmoid_map,
    softmax,
    tanh_map,
    unflatten,
    unpack,
)


class TestSoftmax:
    def test_uniform_on_equal_scores(self):
        np.testing.assert_allclose(softmax([0.0, 0.0, 0.0]), [1 / 3] * 3)

    def test_log3_gap_gives_quarter_three_quarters(self):
        # closed form: softmax([c, c + ln 3]) = [1/4, 3/4]
        for c in (-7.5, 0.0, 3.25, 41.0):
            np.testing.assert_allclose(
                softmax([c, c + math.log(3.0)]), [0.25, 0.75], atol=1e-12)

    def test_singleton_normalizes(self):
        np.testing.assert_array_equal(softmax([123.4]), [1.0])

    def test_empty_raises(self):
        with pytest.raises(EmptyInputError):
            softmax([])

    @given(st.lists(st.floats(-30, 30), min_size=1, max_size=12),
           st.floats(-40, 40))
    def test_shift_invariance(self, xs, c):
        a = softmax(xs)
        b = softmax(np.array(xs) + c)
        np.testing.assert_allclose(a, b, atol=1e-12, rtol=0)

    @given(st.lists(st.floats(-30, 30), min_size=2, max_size=12))
    def test_sums_to_one_positive_and_monotone(self, xs):
        out = softmax(xs)
        assert abs(out.sum() - 1.0) < 1e-12
        assert np.all(out > 0)
        order = np.argsort(xs, kind="stable")
        assert np.all(np.diff(out[order]) >= -1e-18)


class TestMatmul:
    def test_identity(self):
        m = np.arange(6, dtype=float).reshape(2, 3)
        np.testing.assert_array_equal(matmul(np.eye(2), m), m)

    def test_hand_product(self):
        out = matmul(np.array([[1.0, 2.0], [3.0, 4.0]]), np.array([[1.0], [1.0]]))
        np.testing.assert_array_equal(out, [[3.0], [7.0]])

    def test_zero_annihilates(self):
        out = matmul(np.zeros((2, 2)), np.ones((2, 5)))
        np.testing.assert_array_equal(out, np.zeros((2, 5)))

    def test_shape_mismatch(self):
        with pytest.raises(ShapeMismatchError):
            matmul(np.ones((2, 3)), np.ones((2, 3)))

    def test_associativity_on_random_chains(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            a = rng.normal(size=(3, 4))
            b = rng.normal(size=(4, 5))
            c = rng.normal(size=(5, 2))
            left = matmul(matmul(a, b), c)
            right = matmul(a, matmul(b, c))
            np.testing.assert_allclose(left, right, rtol=1e-9)


class TestActivations:
    def test_tanh_zero_fixpoint(self):
        np.testing.assert_array_equal(tanh_map(np.zeros((2, 2))), np.zeros((2, 2)))

    def test_sigmoid_at_zero(self):
        np.testing.assert_array_equal(sigmoid_map(np.zeros((3, 1))), np.full((3, 1), 0.5))

    def test_tanh_table_value(self):
        np.testing.assert_allclose(tanh_map([[0.5]]), [[math.tanh(0.5)]])
        assert abs(tanh_map([[0.5]])[0, 0] - 0.46211715726000974) < 1e-15

    def test_ranges(self):
        x = np.linspace(-50, 50, 101).reshape(1, -1)
        assert np.all(np.abs(tanh_map(x)) <= 1.0)
        s = sigmoid_map(x)
        assert np.all((s >= 0.0) & (s <= 1.0))


class TestRng:
    def test_identical_streams_identical_draws(self):
        a = RngStream(42, 3)
        b = RngStream(42, 3)
        np.testing.assert_array_equal(a.uniform(0, 1, 16), b.uniform(0, 1, 16))

    def test_distinct_stream_ids_differ(self):
        a = rand_uniform(RngStream(42, 0), 0, 1, 64)
        b = rand_uniform(RngStream(42, 1), 0, 1, 64)
        assert not np.array_equal(a, b)

    def test_range_containment(self):
        lo = 1.0
        hi = lo + 1e-9
        x = rand_uniform(RngStream(0, 0), lo, hi, 100)
        assert np.all((x >= lo) & (x < hi))

    def test_bad_range(self):
        with pytest.raises(BadRangeError):
            rand_uniform(RngStream(0, 0), 1.0, 1.0, 4)

    def test_call_index_determinism(self):
        s = RngStream(9, 9)
        first, second = s.uniform(0, 1, 8), s.uniform(0, 1, 8)
        t = RngStream(9, 9)
        np.testing.assert_array_equal(first, t.uniform(0, 1, 8))
        np.testing.assert_array_equal(second, t.uniform(0, 1, 8))


class TestFlatten:
    def test_row_major_order(self):
        pv = flatten([("w", np.array([[1.0, 2.0], [3.0, 4.0]]))])
        np.testing.assert_array_equal(pv.values, [1.0, 2.0, 3.0, 4.0])
        assert pv.layout == [("w", 2, 2)]

    def test_round_trip_random_layouts(self):
        rng = np.random.default_rng(3)
        for _ in range(100):
            n_mats = rng.integers(1, 5)
            weights = [(f"m{i}", rng.normal(size=(int(rng.integers(1, 6)),
                                                  int(rng.integers(1, 6)))))
                       for i in range(n_mats)]
            back = unflatten(flatten(weights))
            assert [n for n, _ in back] == [n for n, _ in weights]
            for (_, a), (_, b) in zip(weights, back):
                np.testing.assert_array_equal(a, b)

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatchError):
            unflatten(ParamVector(np.zeros(3), [("w", 2, 2)]))

    def test_unpack_views_named(self):
        d = unpack(np.arange(6, dtype=float), [("a", 1, 2), ("b", 2, 2)])
        np.testing.assert_array_equal(d["a"], [[0.0, 1.0]])
        np.testing.assert_array_equal(d["b"], [[2.0, 3.0], [4.0, 5.0]])
