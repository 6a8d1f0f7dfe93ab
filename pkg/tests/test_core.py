import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from qckmeans.core import (
    Dataset,
    RngSpec,
    assign_nearest,
    feature_map,
    sample_frequencies,
    sse,
    standardize,
)
from qckmeans.errors import InvalidDataError, InvalidParameterError


def test_dataset_rejects_non_finite():
    with pytest.raises(InvalidDataError):
        Dataset(np.array([[1.0, np.nan]]))
    with pytest.raises(InvalidDataError):
        Dataset(np.array([[np.inf], [0.0]]))


def test_dataset_is_read_only():
    data = Dataset(np.arange(6.0).reshape(3, 2))
    assert (data.N, data.d) == (3, 2)
    with pytest.raises(ValueError):
        data.points[0, 0] = 9.0


def test_standardize_two_point_column():
    out, scaler = standardize(Dataset(np.array([[1.0], [3.0]])))
    np.testing.assert_allclose(out.points.ravel(), [-1.0, 1.0])
    assert scaler.mean[0] == 2.0 and scaler.scale[0] == 1.0


def test_standardize_constant_column():
    out, scaler = standardize(Dataset(np.array([[5.0, 1.0], [5.0, 2.0], [5.0, 4.0]])))
    np.testing.assert_array_equal(out.points[:, 0], 0.0)
    assert scaler.scale[0] == 1.0


def test_standardize_gaussian_moments(rng):
    X = rng.normal(3.0, 2.5, size=(100, 3))
    out, _ = standardize(Dataset(X))
    # recompute column statistics independently
    for j in range(3):
        col = out.points[:, j]
        mean = sum(col) / len(col)
        std = (sum((v - mean) ** 2 for v in col) / len(col)) ** 0.5
        assert abs(mean) <= 1e-9
        assert abs(std - 1.0) <= 1e-9


def test_standardize_needs_two_points():
    with pytest.raises(InvalidDataError):
        standardize(Dataset(np.array([[1.0, 2.0]])))


@given(arrays(np.float64, st.tuples(st.integers(2, 20), st.integers(1, 4)),
              elements=st.floats(-1e3, 1e3, allow_nan=False)))
def test_standardize_round_trip(X):
    out, scaler = standardize(Dataset(X))
    back = scaler.inverse(out.points)
    scale = np.maximum(1.0, np.abs(X).max())
    assert np.all(np.abs(back - X) <= 1e-10 * scale)


def test_frequency_count_default():
    k, d = 3, 2
    W = sample_frequencies(4 * k * d, d, 1.0, RngSpec(0))
    assert W.m == 24 and W.W.shape == (24, 2)


def test_frequency_row_norm_moment():
    W = sample_frequencies(10_000, 2, 1.0, RngSpec(7))
    mean_sq = float((W.W ** 2).sum(axis=1).mean())
    assert abs(mean_sq - 2.0) <= 0.05 * 2.0


def test_frequencies_deterministic_and_sigma_checked():
    a = sample_frequencies(5, 3, 1.0, RngSpec(11))
    b = sample_frequencies(5, 3, 1.0, RngSpec(11))
    np.testing.assert_array_equal(a.W, b.W)
    with pytest.raises(InvalidParameterError):
        sample_frequencies(5, 3, 0.0, RngSpec(0))
    with pytest.raises(InvalidParameterError):
        sample_frequencies(5, 3, -1.0, RngSpec(0))


def test_rng_streams_independent_of_draw_order():
    spec = RngSpec(42)
    first = spec.stream("shots", 3, 1).random(4)
    spec.stream("jitter").random(100)
    np.testing.assert_array_equal(first, spec.stream("shots", 3, 1).random(4))
    assert not np.array_equal(first, spec.stream("shots", 3, 0).random(4))


def test_rng_reseed_touches_one_stream():
    spec = RngSpec(1)
    other = spec.reseed("shots", 99)
    np.testing.assert_array_equal(spec.stream("jitter").random(3), other.stream("jitter").random(3))
    assert not np.array_equal(spec.stream("shots").random(3), other.stream("shots").random(3))


def test_feature_map_trivial_cases(rng):
    W = rng.standard_normal((6, 3))
    np.testing.assert_array_equal(feature_map(np.zeros(3), W), np.ones(6))
    np.testing.assert_array_equal(feature_map(rng.standard_normal(3), np.zeros((6, 3))), np.ones(6))


def test_feature_map_per_component(rng):
    W = rng.standard_normal((8, 2))
    x = rng.standard_normal(2)
    phi = feature_map(x, W)
    for j in range(8):
        t = W[j, 0] * x[0] + W[j, 1] * x[1]
        assert abs(phi[j] - complex(np.cos(t), np.sin(t))) <= 1e-12
    assert np.all(np.abs(np.abs(phi) - 1.0) <= 1e-12)


def test_feature_map_dimension_mismatch():
    with pytest.raises(InvalidParameterError):
        feature_map(np.zeros(3), np.zeros((4, 2)))


def test_assign_tie_and_single_centroid():
    X = np.array([[0.0, 0.0]])
    assert assign_nearest(X, np.array([[1.0, 0.0], [-1.0, 0.0]]))[0] == 0
    assert np.all(assign_nearest(np.random.default_rng(0).random((5, 2)), np.zeros((1, 2))) == 0)


def test_assign_matches_distance_table(rng):
    X = rng.standard_normal((10, 2))
    C = rng.standard_normal((3, 2))
    table = [[sum((X[i, j] - C[g, j]) ** 2 for j in range(2)) for g in range(3)] for i in range(10)]
    expected = [min(range(3), key=lambda g: (row[g], g)) for row in table]
    np.testing.assert_array_equal(assign_nearest(X, C), expected)


def test_sse_examples(rng):
    assert sse(np.array([[0.0], [2.0]]), np.array([[1.0]]), [0, 0]) == 2.0
    C = rng.standard_normal((2, 2))
    assert sse(C[[0, 1, 1]], C, [0, 1, 1]) == 0.0
    X = rng.standard_normal((12, 3))
    C = rng.standard_normal((3, 3))
    a = rng.integers(0, 3, 12)
    total = 0.0
    for i in range(12):
        for j in range(3):
            total += (X[i, j] - C[a[i], j]) ** 2
    assert abs(sse(X, C, a) - total) <= 1e-10


def test_sse_permutation_invariance(rng):
    X = rng.standard_normal((9, 2))
    C = rng.standard_normal((3, 2))
    a = rng.integers(0, 3, 9)
    perm = rng.permutation(9)
    relabel = np.array([2, 0, 1])
    C2 = np.empty_like(C)
    C2[relabel] = C
    assert abs(sse(X[perm], C2, relabel[a[perm]]) - sse(X, C, a)) <= 1e-12


def test_assignment_minimizes_sse_exhaustively(rng):
    for _ in range(5):
        X = rng.standard_normal((6, 2))
        C = rng.standard_normal((3, 2))
        best = min(sse(X, C, a) for a in itertools.product(range(3), repeat=6))
        assert abs(sse(X, C, assign_nearest(X, C)) - best) <= 1e-12
