import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qckmeans import _kernels

pytestmark = pytest.mark.skipif(_kernels.compiled is None, reason="compiled kernels not built")
C, P = _kernels.compiled, _kernels.pure


def state(seed, q):
    g = np.random.default_rng(seed)
    v = g.standard_normal(1 << q) + 1j * g.standard_normal(1 << q)
    return v / np.linalg.norm(v)


@given(st.integers(0, 10_000), st.integers(1, 7), st.data())
def test_apply_1q_parity(seed, q, data):
    qubit = data.draw(st.integers(0, q - 1))
    m = np.random.default_rng(seed).standard_normal(8)
    args = (qubit, complex(m[0], m[1]), complex(m[2], m[3]), complex(m[4], m[5]), complex(m[6], m[7]))
    a, b = state(seed, q), state(seed, q)
    C.apply_1q(a, *args)
    P.apply_1q(b, *args)
    np.testing.assert_allclose(a, b, atol=1e-13)


@given(st.integers(0, 10_000), st.integers(2, 7), st.data(), st.floats(-3, 3))
def test_apply_xy_parity(seed, q, data, beta):
    a_, b_ = data.draw(st.lists(st.integers(0, q - 1), min_size=2, max_size=2, unique=True))
    x, y = state(seed, q), state(seed, q)
    C.apply_xy(x, a_, b_, np.cos(2 * beta), np.sin(2 * beta))
    P.apply_xy(y, a_, b_, np.cos(2 * beta), np.sin(2 * beta))
    np.testing.assert_allclose(x, y, atol=1e-13)


@given(st.integers(0, 10_000), st.integers(1, 6))
def test_apply_diag_parity(seed, q):
    f = np.exp(1j * np.random.default_rng(seed).uniform(0, 6, 1 << q))
    x, y = state(seed, q), state(seed, q)
    C.apply_diag(x, f)
    P.apply_diag(y, f)
    np.testing.assert_allclose(x, y, atol=1e-14)


@given(st.integers(0, 10_000), st.integers(1, 4))
def test_controlled_phase_parity(seed, width):
    theta = np.random.default_rng(seed).uniform(0, 6, 1 << width)
    n = width + 1
    np.testing.assert_allclose(C.controlled_phase_factors(n, width, 0, width, theta),
                               P.controlled_phase_factors(n, width, 0, width, theta), atol=1e-14)


@given(st.integers(0, 10_000), st.integers(1, 9), st.integers(1, 3))
def test_qubo_energies_parity(seed, n, k):
    g = np.random.default_rng(seed)
    A = g.standard_normal((n, n))
    Q = np.ascontiguousarray(A + A.T)
    c = g.standard_normal(n)
    group_of = np.sort(g.integers(0, k, n)).astype(np.int64)
    np.testing.assert_allclose(C.qubo_energies(Q, c, group_of, k, 1.3),
                               P.qubo_energies(Q, c, group_of, k, 1.3), atol=1e-11)


@given(st.integers(0, 10_000), st.integers(1, 50), st.integers(1, 6))
def test_nearest_parity(seed, n, k):
    g = np.random.default_rng(seed)
    X = g.integers(-3, 3, (n, 2)).astype(float)  # integer grid forces ties
    Cc = g.integers(-3, 3, (k, 2)).astype(float)
    np.testing.assert_array_equal(C.nearest(X, Cc), P.nearest(X, Cc))


def test_backend_name():
    assert _kernels.BACKEND in ("cython", "numpy")
