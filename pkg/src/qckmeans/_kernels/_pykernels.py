"""Pure numpy implementations of the hot kernels.

Every function here has the same signature and in-place semantics as its
counterpart in ``_ckernels.pyx``.
"""
from functools import lru_cache

import numpy as np

NAME = "numpy"


def apply_1q(amps, qubit, m00, m01, m10, m11):
    view = amps.reshape(-1, 2, 1 << qubit)
    lo = view[:, 0, :].copy()
    hi = view[:, 1, :]
    view[:, 0, :] = m00 * lo + m01 * hi
    view[:, 1, :] = m10 * lo + m11 * hi


@lru_cache(maxsize=256)
def _pair_indices(size, a, b):
    idx = np.arange(size)
    sel = idx[((idx >> a) & 1 == 1) & ((idx >> b) & 1 == 0)]
    return sel, sel ^ (1 << a) ^ (1 << b)


def apply_xy(amps, a, b, c, s):
    ia, ib = _pair_indices(amps.size, a, b)
    x = amps[ia]
    y = amps[ib]
    amps[ia] = c * x - 1j * s * y
    amps[ib] = -1j * s * x + c * y


def apply_diag(amps, factors):
    amps *= factors


def controlled_phase_factors(n_qubits, control, start, width, theta):
    idx = np.arange(1 << n_qubits)
    slot = (idx >> start) & ((1 << width) - 1)
    factors = np.exp(1j * np.asarray(theta)[slot])
    factors[((idx >> control) & 1) == 0] = 1.0
    return factors


def qubo_energies(Q, c, group_of, n_groups, lam):
    n = c.shape[0]
    size = 1 << n
    member = np.zeros((n, n_groups))
    member[np.arange(n), group_of] = 1.0
    out = np.empty(size)
    shifts = np.arange(n)
    chunk = 1 << 15
    for start in range(0, size, chunk):
        idx = np.arange(start, min(size, start + chunk))
        bits = ((idx[:, None] >> shifts) & 1).astype(float)
        fit = np.einsum("bi,ij,bj->b", bits, Q, bits) + bits @ c
        pen = ((1.0 - bits @ member) ** 2).sum(axis=1)
        out[idx] = fit + lam * pen
    return out


def nearest(X, C):
    out = np.empty(X.shape[0], dtype=np.int64)
    chunk = max(1, 2_000_000 // max(1, C.shape[0] * X.shape[1]))
    for start in range(0, X.shape[0], chunk):
        block = X[start:start + chunk]
        dist = ((block[:, None, :] - C[None, :, :]) ** 2).sum(axis=2)
        out[start:start + chunk] = dist.argmin(axis=1)
    return out
