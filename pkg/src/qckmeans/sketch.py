"""Fourier-feature sketches: exact means and Hadamard-test (QFF) estimates."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Dataset, FrequencyMatrix, as_rng, feature_map
from .errors import EmptyClusterError, InvalidParameterError
from .statevec import (
    Circuit,
    DiagonalOracle,
    NoiseModel,
    apply_controlled_diagonal,
    apply_h,
    apply_sdg,
    expectation_z,
    init_zero,
)

_CHUNK = 4096


@dataclass(frozen=True)
class Sketch:
    z: np.ndarray
    kind: str = "exact"
    shots: int = 0
    width: int = 0  # widest register simulated to produce it

    @property
    def m(self) -> int:
        return self.z.shape[0]


@dataclass(frozen=True)
class QffConfig:
    """Subsample size ``B`` and shots per measurement basis ``shots_per_basis``.

    ``analytic`` replaces shot sampling with exact ancilla expectations.
    ``trajectories`` bounds how many noise trajectories the shots are split
    over when gate noise is on.
    """

    B: int = 256
    shots_per_basis: int = 1024
    analytic: bool = False
    trajectories: int = 32

    def __post_init__(self):
        if self.B < 1 or self.shots_per_basis < 1:
            raise InvalidParameterError("B and shots_per_basis must be positive")

    def with_B(self, B: int) -> "QffConfig":
        return QffConfig(B, self.shots_per_basis, self.analytic, self.trajectories)


@dataclass(frozen=True)
class QffRegisters:
    n_i: int
    M: int

    @classmethod
    def for_subsample(cls, B: int) -> "QffRegisters":
        if B < 1:
            raise InvalidParameterError("B must be positive")
        n_i = max(1, (B - 1).bit_length())
        return cls(n_i, 1 << n_i)

    @property
    def width(self) -> int:
        return self.n_i + 1


def _frequencies(W):
    return W.W if isinstance(W, FrequencyMatrix) else np.asarray(W, dtype=float)


def _data_points(data):
    return data.points if isinstance(data, Dataset) else np.atleast_2d(np.asarray(data, dtype=float))


def exact_sketch(data, W) -> Sketch:
    X = _data_points(data)
    Wm = _frequencies(W)
    if X.shape[1] != Wm.shape[1]:
        raise InvalidParameterError("data and frequency dimensions differ")
    total = np.zeros(Wm.shape[0], dtype=np.complex128)
    for start in range(0, X.shape[0], _CHUNK):
        total += feature_map(X[start:start + _CHUNK], Wm).sum(axis=0)
    return Sketch(total / X.shape[0], "exact")


def centroid_sketch(centroids, W) -> Sketch:
    C = np.atleast_2d(np.asarray(centroids, dtype=float))
    return Sketch(feature_map(C, W).mean(axis=0), "exact")


def subsample_indices(N: int, B: int, rng: np.random.Generator) -> np.ndarray:
    """B distinct indices drawn uniformly without replacement."""
    if not 1 <= B <= N:
        raise InvalidParameterError(f"subsample size B={B} must lie in [1, N={N}]")
    return rng.choice(N, size=B, replace=False)


def hadamard_test_circuit(phases, registers: QffRegisters, basis: str) -> Circuit:
    """Index qubits 0..n_i-1, ancilla on qubit n_i."""
    if basis not in ("real", "imaginary"):
        raise InvalidParameterError(f"unknown basis {basis!r}")
    oracle = DiagonalOracle.padded(phases, registers.n_i)
    n_i = registers.n_i
    anc = n_i
    targets = tuple(range(n_i))
    circ = Circuit(n_i + 1, lambda: init_zero(n_i + 1))
    circ.add("h", (anc,), lambda s: apply_h(s, anc))
    for t in targets:
        circ.add("h", (t,), lambda s, t=t: apply_h(s, t))
    circ.add("c-oracle", (anc,) + targets, lambda s: apply_controlled_diagonal(s, oracle, anc, targets))
    if basis == "imaginary":
        circ.add("sdg", (anc,), lambda s: apply_sdg(s, anc))
    circ.add("h", (anc,), lambda s: apply_h(s, anc))
    return circ


def hadamard_test_mu(phases, registers: QffRegisters, basis: str = "real", shots: int = 1024,
                     noise: NoiseModel | None = None, rng: np.random.Generator | None = None,
                     analytic: bool = False, trajectories: int = 32) -> float:
    """Estimate Re or Im of <psi|U|psi> from the ancilla of a Hadamard test.

    In analytic mode the exact ideal expectation is returned and ``noise``
    is ignored.
    """
    circ = hadamard_test_circuit(phases, registers, basis)
    if analytic:
        return expectation_z(circ.run(), registers.n_i)
    return circ.sample(shots, noise, rng, trajectories).marginal_z(registers.n_i)


def mu_closed_form(phases, M: int) -> complex:
    phases = np.asarray(phases, dtype=float)
    return complex((np.exp(1j * phases).sum() + (M - phases.size)) / M)


def qff_estimate_component(data, W, j: int, cfg: QffConfig, noise: NoiseModel | None = None,
                           rng=None, key: tuple = ()) -> complex:
    """One unbiased sketch component from a fresh subsample and two Hadamard tests.

    Both bases share the subsample; each has its own shot stream.
    """
    X = _data_points(data)
    Wm = _frequencies(W)
    spec = as_rng(rng)
    B = cfg.B
    regs = QffRegisters.for_subsample(B)
    idx = subsample_indices(X.shape[0], B, spec.stream("subsampling", *key, j))
    theta = X[idx] @ Wm[j]
    re = hadamard_test_mu(theta, regs, "real", cfg.shots_per_basis, noise,
                          spec.stream("shots", *key, j, 0), cfg.analytic, cfg.trajectories)
    im = hadamard_test_mu(theta, regs, "imaginary", cfg.shots_per_basis, noise,
                          spec.stream("shots", *key, j, 1), cfg.analytic, cfg.trajectories)
    M = regs.M
    return (M / B) * complex(re, im) - (M - B) / B


def qff_estimate_sketch(data, W, cfg: QffConfig, noise: NoiseModel | None = None, rng=None,
                        key: tuple = ()) -> Sketch:
    Wm = _frequencies(W)
    z = np.array([qff_estimate_component(data, Wm, j, cfg, noise, rng, key) for j in range(Wm.shape[0])])
    shots = 0 if cfg.analytic else 2 * cfg.shots_per_basis * Wm.shape[0]
    return Sketch(z, "estimated", shots, QffRegisters.for_subsample(cfg.B).width)


def group_sketch(data, assignment, group: int, W, cfg: QffConfig, noise: NoiseModel | None = None,
                 rng=None, key: tuple = ()) -> Sketch:
    """QFF sketch over the points assigned to ``group``; B is clamped to the cluster size."""
    X = _data_points(data)
    members = X[np.asarray(assignment) == group]
    if members.shape[0] == 0:
        raise EmptyClusterError(group)
    return qff_estimate_sketch(members, W, cfg.with_B(min(cfg.B, members.shape[0])), noise, rng,
                               key + ("group", group))


@dataclass(frozen=True)
class SketchDiagnostics:
    """Per-component population variance (c_j), sampling fraction and MSE bound."""

    population_variance: np.ndarray
    fraction: float
    mse_bound: np.ndarray
    shot_term: float


def sketch_diagnostics(data, W, cfg: QffConfig) -> SketchDiagnostics:
    X = _data_points(data)
    N = X.shape[0]
    zbar = exact_sketch(X, W).z
    if N > 1:
        s_v2 = N / (N - 1) * np.clip(1.0 - np.abs(zbar) ** 2, 0.0, None)
    else:
        s_v2 = np.zeros(zbar.shape)
    B = cfg.B
    M = QffRegisters.for_subsample(B).M
    shot_term = 2.0 * M * M / (B * B * cfg.shots_per_basis)
    return SketchDiagnostics(s_v2, B / N, s_v2 / B + shot_term, shot_term)
