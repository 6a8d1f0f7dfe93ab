"""Dense statevector simulation for small registers.

Bit ordering: qubit 0 is the least significant bit of the basis index.
Bitstrings are written most significant qubit first, so the rightmost
character is qubit 0.

Gate functions mutate the state in place and return it, which keeps a
single circuit execution allocation-free. Use ``Statevector.copy`` to keep
an earlier state around.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import _kernels
from .errors import CapacityError, InvalidParameterError

MAX_QUBITS = 20

_SQRT1_2 = 1.0 / np.sqrt(2.0)
_PAULIS = {
    "X": (0.0, 1.0, 1.0, 0.0),
    "Y": (0.0, -1j, 1j, 0.0),
    "Z": (1.0, 0.0, 0.0, -1.0),
}


@dataclass
class Statevector:
    amplitudes: np.ndarray
    q: int

    def __post_init__(self):
        if not 1 <= self.q <= MAX_QUBITS:
            raise CapacityError(f"{self.q} qubits outside [1, {MAX_QUBITS}]")
        if self.amplitudes.shape != (1 << self.q,):
            raise InvalidParameterError("amplitude vector length must be 2**q")

    def copy(self) -> "Statevector":
        return Statevector(self.amplitudes.copy(), self.q)

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def norm(self) -> float:
        return float(np.sum(self.probabilities()))


def init_zero(q: int) -> Statevector:
    if not 1 <= q <= MAX_QUBITS:
        raise CapacityError(f"{q} qubits outside [1, {MAX_QUBITS}]")
    amps = np.zeros(1 << q, dtype=np.complex128)
    amps[0] = 1.0
    return Statevector(amps, q)


def init_basis(q: int, index: int) -> Statevector:
    state = init_zero(q)
    state.amplitudes[0] = 0.0
    state.amplitudes[index] = 1.0
    return state


def prepare_w_state(q: int) -> Statevector:
    state = init_zero(q)
    state.amplitudes[0] = 0.0
    state.amplitudes[1 << np.arange(q)] = 1.0 / np.sqrt(q)
    return state


def _check_qubit(state, qubit):
    if not 0 <= qubit < state.q:
        raise InvalidParameterError(f"qubit {qubit} out of range for {state.q}-qubit state")


def apply_matrix_1q(state: Statevector, qubit: int, m00, m01, m10, m11) -> Statevector:
    _check_qubit(state, qubit)
    _kernels.apply_1q(state.amplitudes, qubit, complex(m00), complex(m01), complex(m10), complex(m11))
    return state


def apply_h(state: Statevector, qubit: int) -> Statevector:
    return apply_matrix_1q(state, qubit, _SQRT1_2, _SQRT1_2, _SQRT1_2, -_SQRT1_2)


def apply_sdg(state: Statevector, qubit: int) -> Statevector:
    return apply_matrix_1q(state, qubit, 1.0, 0.0, 0.0, -1j)


def apply_pauli(state: Statevector, qubit: int, name: str) -> Statevector:
    return apply_matrix_1q(state, qubit, *_PAULIS[name])


@dataclass(frozen=True)
class DiagonalOracle:
    """diag(e^{i theta_1}, ..., e^{i theta_B}, 1, ..., 1) over 2^n_i slots."""

    phases: np.ndarray
    n_active: int

    @classmethod
    def padded(cls, theta, width: int) -> "DiagonalOracle":
        theta = np.asarray(theta, dtype=float).ravel()
        size = 1 << width
        if theta.size > size:
            raise InvalidParameterError(f"{theta.size} phases do not fit in {size} slots")
        if not np.all(np.isfinite(theta)):
            raise InvalidParameterError("oracle phases must be finite")
        phases = np.zeros(size)
        phases[: theta.size] = theta
        phases.setflags(write=False)
        return cls(phases, theta.size)

    @property
    def width(self) -> int:
        return int(self.phases.size).bit_length() - 1


def apply_controlled_diagonal(state: Statevector, oracle: DiagonalOracle, control: int,
                              targets: Sequence[int]) -> Statevector:
    """Multiply amplitudes with control=1 by e^{i theta[m]}, m read from ``targets``.

    ``targets`` must be a contiguous ascending run of qubits; its first entry
    holds the least significant bit of the slot index.
    """
    targets = list(targets)
    _check_qubit(state, control)
    if len(targets) != oracle.width:
        raise InvalidParameterError(f"oracle spans {oracle.width} qubits, got {len(targets)} targets")
    if control in targets:
        raise InvalidParameterError("control qubit cannot be a target")
    start = targets[0]
    if targets != list(range(start, start + len(targets))) or start + len(targets) > state.q:
        raise InvalidParameterError("targets must be a contiguous qubit range inside the register")
    factors = _kernels.controlled_phase_factors(state.q, control, start, len(targets), oracle.phases)
    _kernels.apply_diag(state.amplitudes, factors)
    return state


def apply_cost_phase(state: Statevector, energies, gamma: float) -> Statevector:
    energies = np.asarray(energies, dtype=float)
    if energies.shape != state.amplitudes.shape:
        raise InvalidParameterError("energy vector length must match the state dimension")
    _kernels.apply_diag(state.amplitudes, np.exp(-1j * gamma * energies))
    return state


def apply_xy_pair(state: Statevector, qubit_a: int, qubit_b: int, beta: float) -> Statevector:
    """exp(-i beta (XX + YY)) on two qubits."""
    _check_qubit(state, qubit_a)
    _check_qubit(state, qubit_b)
    if qubit_a == qubit_b:
        raise InvalidParameterError("XY pair needs two distinct qubits")
    _kernels.apply_xy(state.amplitudes, qubit_a, qubit_b, float(np.cos(2 * beta)), float(np.sin(2 * beta)))
    return state


def apply_block_unitary(state: Statevector, start: int, U) -> Statevector:
    """Apply a 2^w x 2^w unitary to the contiguous qubits start..start+w-1."""
    U = np.asarray(U, dtype=np.complex128)
    w = int(U.shape[0]).bit_length() - 1
    if U.shape != (1 << w, 1 << w) or start < 0 or start + w > state.q:
        raise InvalidParameterError("block unitary does not fit the register")
    view = state.amplitudes.reshape(-1, 1 << w, 1 << start)
    view[...] = np.einsum("ij,ajb->aib", U, view)
    return state


def expectation_z(state: Statevector, qubit: int) -> float:
    _check_qubit(state, qubit)
    probs = state.probabilities().reshape(-1, 2, 1 << qubit)
    return float(probs[:, 0, :].sum() - probs[:, 1, :].sum())


@dataclass(frozen=True)
class NoiseModel:
    """Depolarizing gate noise plus symmetric readout flips."""

    p1: float = 0.0
    p2: float = 0.0
    p_ro: float = 0.0

    def __post_init__(self):
        for name in ("p1", "p2", "p_ro"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise InvalidParameterError(f"{name}={value} is not a probability")

    @property
    def gate_free(self) -> bool:
        return self.p1 == 0.0 and self.p2 == 0.0

    @classmethod
    def parse(cls, text: str) -> "NoiseModel":
        parts = [float(v) for v in text.split(",")]
        if len(parts) != 3:
            raise InvalidParameterError("noise must be given as p1,p2,p_ro")
        return cls(*parts)


@dataclass(frozen=True)
class ShotResult:
    """Measurement outcomes as parallel arrays of basis indices and counts."""

    q: int
    outcomes: np.ndarray
    hits: np.ndarray

    @property
    def shots(self) -> int:
        return int(self.hits.sum())

    @property
    def counts(self) -> dict:
        return {format(int(b), f"0{self.q}b"): int(c) for b, c in zip(self.outcomes, self.hits)}

    def marginal_z(self, qubit: int) -> float:
        """(n0 - n1) / shots on one wire."""
        ones = self.hits[((self.outcomes >> qubit) & 1) == 1].sum()
        return float(self.shots - 2 * ones) / self.shots

    @staticmethod
    def merge(results: Sequence["ShotResult"]) -> "ShotResult":
        outcomes = np.concatenate([r.outcomes for r in results])
        hits = np.concatenate([r.hits for r in results])
        uniq, inv = np.unique(outcomes, return_inverse=True)
        return ShotResult(results[0].q, uniq, np.bincount(inv, weights=hits).astype(np.int64))


def sample_shots(state: Statevector, shots: int, noise: NoiseModel | None = None,
                 rng: np.random.Generator | None = None) -> ShotResult:
    if shots < 1:
        raise InvalidParameterError("shots must be positive")
    rng = rng if rng is not None else np.random.default_rng(0)
    probs = state.probabilities()
    probs = probs / probs.sum()
    draws = rng.multinomial(shots, probs)
    outcomes = np.flatnonzero(draws)
    hits = draws[outcomes]
    if noise is not None and noise.p_ro > 0.0:
        per_shot = np.repeat(outcomes, hits)
        flips = rng.random((shots, state.q)) < noise.p_ro
        per_shot = per_shot ^ (flips.astype(np.int64) << np.arange(state.q)).sum(axis=1)
        outcomes, hits = np.unique(per_shot, return_counts=True)
    return ShotResult(state.q, outcomes.astype(np.int64), hits.astype(np.int64))


@dataclass(frozen=True)
class Gate:
    """A gate application: ``apply(state)`` acting on ``qubits``.

    Noise treats any gate touching two or more qubits as a two-qubit gate.
    """

    name: str
    qubits: tuple
    apply: Callable[[Statevector], Statevector]


def apply_noisy_gate(state: Statevector, gate: Gate, noise: NoiseModel | None,
                     rng: np.random.Generator) -> Statevector:
    """Ideal gate, then a random non-identity Pauli on each touched qubit
    with probability p1 (single-qubit gate) or p2 (multi-qubit gate)."""
    gate.apply(state)
    if noise is None or noise.gate_free:
        return state
    p = noise.p1 if len(gate.qubits) == 1 else noise.p2
    for qubit in gate.qubits:
        if rng.random() < p:
            apply_pauli(state, qubit, "XYZ"[rng.integers(3)])
    return state


@dataclass
class Circuit:
    """Initial state factory plus an ordered gate list."""

    q: int
    prepare: Callable[[], Statevector]
    gates: list = field(default_factory=list)

    def add(self, name, qubits, fn) -> "Circuit":
        self.gates.append(Gate(name, tuple(qubits), fn))
        return self

    def run(self, noise: NoiseModel | None = None, rng: np.random.Generator | None = None) -> Statevector:
        state = self.prepare()
        if noise is None or noise.gate_free:
            for gate in self.gates:
                gate.apply(state)
            return state
        for gate in self.gates:
            apply_noisy_gate(state, gate, noise, rng)
        return state

    def _ideal_prefixes(self):
        states = [self.prepare()]
        for gate in self.gates:
            states.append(gate.apply(states[-1].copy()))
        return states

    def trajectory(self, noise: NoiseModel, rng: np.random.Generator, prefixes=None) -> Statevector:
        """One stochastic Pauli trajectory.

        Noise events are drawn up front; the state is replayed from the ideal
        prefix just before the first event, so quiet trajectories are free.
        """
        events = []
        for gi, gate in enumerate(self.gates):
            p = noise.p1 if len(gate.qubits) == 1 else noise.p2
            for qubit in gate.qubits:
                if rng.random() < p:
                    events.append((gi, qubit, "XYZ"[rng.integers(3)]))
        prefixes = prefixes if prefixes is not None else self._ideal_prefixes()
        if not events:
            return prefixes[-1].copy()
        first = events[0][0]
        state = prefixes[first + 1].copy()
        pending = iter(events)
        event = next(pending, None)
        for gi in range(first, len(self.gates)):
            if gi > first:
                self.gates[gi].apply(state)
            while event is not None and event[0] == gi:
                apply_pauli(state, event[1], event[2])
                event = next(pending, None)
        return state

    def sample(self, shots: int, noise: NoiseModel | None = None, rng: np.random.Generator | None = None,
               trajectories: int = 32) -> ShotResult:
        """Sample ``shots`` outcomes.

        With gate noise, shots are split evenly over ``trajectories``
        independent Pauli trajectories (at most one trajectory per shot).
        """
        rng = rng if rng is not None else np.random.default_rng(0)
        if noise is None or noise.gate_free:
            return sample_shots(self.run(), shots, noise, rng)
        batches = max(1, min(trajectories, shots))
        sizes = np.full(batches, shots // batches)
        sizes[: shots % batches] += 1
        prefixes = self._ideal_prefixes()
        results = [sample_shots(self.trajectory(noise, rng, prefixes), int(n), noise, rng) for n in sizes]
        return ShotResult.merge(results)
