"""Candidate-selection QUBOs built from sketches.

Variables are ordered group by group: variable ``offset[g] + r`` selects
candidate ``r`` of group ``g``. The same index is the qubit index in the
QAOA register.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, replace

import numpy as np

from . import _kernels
from .core import FrequencyMatrix, feature_map
from .errors import CapacityError, InvalidParameterError
from .sketch import Sketch
from .statevec import MAX_QUBITS

DEFAULT_EPSILON = 1e-3


@dataclass(frozen=True)
class CandidateSet:
    """Per-group candidate centroids (standardized space) and their features."""

    centers: tuple
    features: tuple

    @classmethod
    def from_centers(cls, centers, W: FrequencyMatrix) -> "CandidateSet":
        centers = tuple(np.atleast_2d(np.asarray(c, dtype=float)) for c in centers)
        if any(c.shape[0] < 1 for c in centers):
            raise InvalidParameterError("every group needs at least one candidate")
        return cls(centers, tuple(feature_map(c, W) for c in centers))

    @property
    def k(self) -> int:
        return len(self.centers)

    @property
    def sizes(self) -> tuple:
        return tuple(c.shape[0] for c in self.centers)

    @property
    def D(self) -> int:
        return max(self.sizes)

    def pick(self, selection) -> np.ndarray:
        return np.array([self.centers[g][r] for g, r in enumerate(selection)])


@dataclass(frozen=True)
class GroupQubo:
    """y^T Q y + c^T y + lam (1 - sum y)^2 for one group."""

    Q: np.ndarray
    c: np.ndarray
    lam: float
    s_coef: float = 1.0
    epsilon: float = DEFAULT_EPSILON

    @property
    def n(self) -> int:
        return self.c.shape[0]

    @property
    def groups(self) -> tuple:
        return (self.n,)


@dataclass(frozen=True)
class JointQubo:
    """Full CKM QUBO over all groups, with inter-group coupling blocks."""

    Q: np.ndarray
    c: np.ndarray
    lam: float
    groups: tuple
    s_coef: float = 1.0
    epsilon: float = DEFAULT_EPSILON

    @property
    def n(self) -> int:
        return self.c.shape[0]

    @property
    def k(self) -> int:
        return len(self.groups)

    @property
    def offsets(self) -> np.ndarray:
        return np.concatenate([[0], np.cumsum(self.groups)])

    def _slice(self, g):
        o = self.offsets
        return slice(o[g], o[g + 1])

    def coupling(self, g: int, h: int) -> np.ndarray:
        """R_gh, the D_g x D_h block between groups g and h."""
        return self.Q[self._slice(g), self._slice(h)]

    def diagonal_block(self, g: int) -> GroupQubo:
        s = self._slice(g)
        return GroupQubo(self.Q[s, s], self.c[s], self.lam, self.s_coef, self.epsilon)

    def without_couplings(self) -> "JointQubo":
        Q = np.zeros_like(self.Q)
        for g in range(self.k):
            s = self._slice(g)
            Q[s, s] = self.Q[s, s]
        return replace(self, Q=Q)


def _sym(Q):
    return 0.5 * (Q + Q.T)


def _raw_group_terms(z_target, features):
    z = z_target.z if isinstance(z_target, Sketch) else np.asarray(z_target)
    V = np.atleast_2d(np.asarray(features))
    # <a, b> = sum conj(a) b
    c = -2.0 * np.real(V @ np.conj(z))
    Q = _sym(np.real(np.conj(V) @ V.T))
    return Q, c


def normalize_and_set_penalty(qubo, epsilon: float = DEFAULT_EPSILON):
    """Rescale so sum|c| + sum|Q| = 1, then set lam = 1 + epsilon."""
    if epsilon <= 0:
        raise InvalidParameterError("epsilon must be positive")
    total = float(np.abs(qubo.c).sum() + np.abs(qubo.Q).sum())
    s_coef = total if total > 0 else 1.0
    return replace(qubo, Q=qubo.Q / s_coef, c=qubo.c / s_coef, lam=1.0 + epsilon,
                   s_coef=s_coef, epsilon=epsilon)


def _bound_penalty(qubo, epsilon):
    off = np.abs(qubo.Q).sum() - np.abs(np.diag(qubo.Q)).sum()
    return replace(qubo, lam=float(np.abs(qubo.c).sum() + off + epsilon), s_coef=1.0, epsilon=epsilon)


def _finish(qubo, lambda_mode, epsilon):
    if lambda_mode == "normalized":
        return normalize_and_set_penalty(qubo, epsilon)
    if lambda_mode == "bound":
        return _bound_penalty(qubo, epsilon)
    raise InvalidParameterError(f"unknown lambda_mode {lambda_mode!r}")


def build_group_qubo(z_target, features, lambda_mode: str = "normalized",
                     epsilon: float = DEFAULT_EPSILON) -> GroupQubo:
    """min_r ||v_r - z_target||^2 as a one-hot QUBO (constant ||z||^2 dropped).

    ``lambda_mode="normalized"`` rescales coefficients and uses lam = 1 + eps;
    ``"bound"`` keeps raw coefficients and sets lam to the sufficient bound.
    """
    Q, c = _raw_group_terms(z_target, features)
    if c.size < 1:
        raise InvalidParameterError("need at least one candidate")
    return _finish(GroupQubo(Q, c, 0.0), lambda_mode, epsilon)


def build_joint_qubo(z_X, candidates: CandidateSet, lambda_mode: str = "normalized",
                     epsilon: float = DEFAULT_EPSILON) -> JointQubo:
    k = candidates.k
    V = np.vstack(candidates.features)
    z = z_X.z if isinstance(z_X, Sketch) else np.asarray(z_X)
    c = -(2.0 / k) * np.real(V @ np.conj(z))
    Q = _sym(np.real(np.conj(V) @ V.T)) / k**2
    return _finish(JointQubo(Q, c, 0.0, candidates.sizes), lambda_mode, epsilon)


def _group_of(qubo) -> np.ndarray:
    return np.repeat(np.arange(len(qubo.groups)), qubo.groups).astype(np.int64)


def energy(qubo, y, include_penalty: bool = True) -> float:
    y = np.asarray(y, dtype=float)
    if y.shape != (qubo.n,):
        raise InvalidParameterError(f"expected {qubo.n} binary variables")
    value = float(y @ qubo.Q @ y + qubo.c @ y)
    if include_penalty:
        sums = np.bincount(_group_of(qubo), weights=y, minlength=len(qubo.groups))
        value += qubo.lam * float(((1.0 - sums) ** 2).sum())
    return value


def selection_vector(qubo, selection) -> np.ndarray:
    y = np.zeros(qubo.n)
    offsets = np.concatenate([[0], np.cumsum(qubo.groups)])
    for g, r in enumerate(selection):
        if not 0 <= r < qubo.groups[g]:
            raise InvalidParameterError(f"selection {r} out of range for group {g}")
        y[offsets[g] + r] = 1.0
    return y


def to_diagonal_energies(qubo) -> np.ndarray:
    """Penalized energy of every basis index; bit i of the index is variable i."""
    if qubo.n > MAX_QUBITS:
        raise CapacityError(f"{qubo.n} variables exceed the {MAX_QUBITS}-qubit capacity")
    return _kernels.qubo_energies(np.ascontiguousarray(qubo.Q, dtype=np.float64),
                                  np.ascontiguousarray(qubo.c, dtype=np.float64),
                                  _group_of(qubo), len(qubo.groups), float(qubo.lam))


def feasible_mask(groups, size=None) -> np.ndarray:
    """True at basis indices with exactly one set bit per group."""
    n = int(sum(groups))
    idx = np.arange(size if size is not None else 1 << n)
    ok = np.ones(idx.shape, dtype=bool)
    start = 0
    for D in groups:
        block = (idx >> start) & ((1 << D) - 1)
        ok &= (block != 0) & ((block & (block - 1)) == 0)
        start += D
    return ok


def decode_selection(groups, index: int) -> tuple:
    out = []
    start = 0
    for D in groups:
        block = (index >> start) & ((1 << D) - 1)
        out.append(int(block).bit_length() - 1)
        start += D
    return tuple(out)


def ising_form(qubo):
    """(h, J, offset) with E(y) = offset + sum h_i s_i + sum_{i<j} J_ij s_i s_j, y = (1 - s)/2."""
    n = qubo.n
    group_of = _group_of(qubo)
    same = (group_of[:, None] == group_of[None, :]).astype(float)
    A = qubo.Q + qubo.lam * same
    a = qubo.c - 2.0 * qubo.lam
    const = qubo.lam * len(qubo.groups)
    J = np.triu(A + A.T, k=1) / 4.0
    diag = np.diag(A)
    # y_i = (1 - s_i)/2, y_i^2 = y_i
    h = -(a + diag) / 2.0 - (A + A.T - 2 * np.diag(diag)).sum(axis=1) / 4.0
    offset = const + (a + diag).sum() / 2.0 + (A.sum() - diag.sum()) / 4.0
    return h, J, float(offset)


def coupling_count(qubo, tol: float = 1e-15) -> int:
    _, J, _ = ising_form(qubo)
    return int((np.abs(J) > tol).sum())


def relaxation_gap_bounds(joint: JointQubo) -> tuple[float, float]:
    total = 0.0
    for g in range(joint.k):
        for h in range(g + 1, joint.k):
            R = joint.coupling(g, h)
            total += float(np.abs(R).max()) if R.size else 0.0
    return 2.0 * total, 4.0 * total


def coupling_energy(joint: JointQubo, selection) -> float:
    """E(x) = F(x) - F~(x): the inter-group part of the quadratic form."""
    offsets = joint.offsets
    idx = [offsets[g] + r for g, r in enumerate(selection)]
    total = 0.0
    for g in range(joint.k):
        for h in range(g + 1, joint.k):
            total += joint.Q[idx[g], idx[h]] + joint.Q[idx[h], idx[g]]
    return float(total)


def qubo_to_json(qubo) -> str:
    return json.dumps({
        "n": qubo.n,
        "groups": [int(g) for g in qubo.groups],
        "Q": [float(v) for v in np.asarray(qubo.Q).ravel()],
        "c": [float(v) for v in qubo.c],
        "lambda": float(qubo.lam),
    })


def qubo_from_json(text: str):
    obj = json.loads(text)
    n = int(obj["n"])
    Q = np.asarray(obj["Q"], dtype=float).reshape(n, n)
    c = np.asarray(obj["c"], dtype=float)
    groups = tuple(int(g) for g in obj["groups"])
    if sum(groups) != n or c.shape != (n,):
        raise InvalidParameterError("inconsistent QUBO dump")
    if len(groups) == 1:
        return GroupQubo(Q, c, float(obj["lambda"]))
    return JointQubo(Q, c, float(obj["lambda"]), groups)
