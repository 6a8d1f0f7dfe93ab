"""QAOA with an XY ring mixer per group, plus exhaustive reference solvers."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce

import numpy as np

from .errors import CapacityError, InvalidParameterError
from .qubo import (
    GroupQubo,
    JointQubo,
    coupling_count,
    decode_selection,
    feasible_mask,
    ising_form,
    to_diagonal_energies,
)
from .statevec import (
    Circuit,
    NoiseModel,
    Statevector,
    apply_block_unitary,
    apply_cost_phase,
    apply_xy_pair,
    sample_shots,
)

JOINT_ENUMERATION_CAP = 10**7
MIXERS = ("ring", "exact")
GROUP_ENUMERATION_CAP = 24


@dataclass(frozen=True)
class QaoaConfig:
    """QAOA depth, shot budget and parameter-search settings.

    ``shots`` is the total budget for one solve. Without gate or readout
    noise the search uses exact expectations and all shots go to sampling
    the final state; with noise the budget is split evenly over the search
    evaluations and every sample is pooled for selection.
    """

    p: int = 1
    shots: int = 10_000
    init: str = "w_state"
    mixer: str = "ring"
    grid: int = 8
    budget: int = 60
    restarts: int = 1
    noise: NoiseModel | None = None
    trajectories: int = 16

    def __post_init__(self):
        if self.p < 1 or self.shots < 1:
            raise InvalidParameterError("p and shots must be positive")
        if self.init not in ("w_state", "single_excitation"):
            raise InvalidParameterError(f"unknown init {self.init!r}")
        if self.mixer not in MIXERS:
            raise InvalidParameterError(f"unknown mixer {self.mixer!r}")
        if self.grid < 1 or self.budget < 0 or self.restarts < 1:
            raise InvalidParameterError("invalid parameter-search settings")

    @property
    def exact_search(self) -> bool:
        return self.noise is None or (self.noise.gate_free and self.noise.p_ro == 0.0)

    @property
    def max_evaluations(self) -> int:
        return self.grid * self.grid + self.restarts * self.budget


@dataclass
class SolveReport:
    selection: tuple
    energy: float
    gammas: tuple = ()
    betas: tuple = ()
    feasible_fraction: float = 1.0
    delta: float | None = None
    gate_counts: tuple = (0, 0)
    n_qubits: int = 0
    shots: int = 0
    evaluations: int = 0
    fallback: bool = False
    history: list = field(default_factory=list, repr=False)

    @property
    def selected(self) -> int:
        return self.selection[0]


def ring_pairs(D: int) -> list:
    """Odd pairs, then even pairs, then the wrap pair (0-based)."""
    pairs = [(t, t + 1) for t in range(0, D - 1, 2)]
    pairs += [(t, t + 1) for t in range(1, D - 1, 2)]
    if D >= 3:
        pairs.append((D - 1, 0))
    return pairs


def initial_state(groups, init: str = "w_state") -> Statevector:
    blocks = []
    for D in groups:
        vec = np.zeros(1 << D, dtype=np.complex128)
        if init == "w_state":
            vec[1 << np.arange(D)] = 1.0 / np.sqrt(D)
        else:
            vec[1] = 1.0
        blocks.append(vec)
    # kron puts its first argument in the high bits
    amps = reduce(lambda acc, b: np.kron(b, acc), blocks[1:], blocks[0])
    return Statevector(amps, int(sum(groups)))


def _groups_for(energies, groups):
    n = int(np.log2(len(energies)))
    if (1 << n) != len(energies):
        raise InvalidParameterError("energy vector length must be a power of two")
    groups = tuple(groups) if groups is not None else (n,)
    if sum(groups) != n:
        raise InvalidParameterError("group sizes do not match the register")
    return groups


def ring_hamiltonian(D: int) -> np.ndarray:
    """Dense sum of XX + YY over the ring edges on D qubits (real, symmetric)."""
    size = 1 << D
    H = np.zeros((size, size))
    for a, b in ring_pairs(D):
        for i in range(size):
            if (i >> a) & 1 and not (i >> b) & 1:
                j = i ^ (1 << a) ^ (1 << b)
                H[i, j] = H[j, i] = 2.0
    return H


_RING_EIGEN = {}


def ring_mixer_unitary(D: int, beta: float) -> np.ndarray:
    """exp(-i beta H_ring), computed from a cached eigendecomposition."""
    if D not in _RING_EIGEN:
        _RING_EIGEN[D] = np.linalg.eigh(ring_hamiltonian(D))
    vals, vecs = _RING_EIGEN[D]
    return (vecs * np.exp(-1j * beta * vals)) @ vecs.T


def build_qaoa_circuit(energies, gammas, betas, init: str = "w_state", groups=None,
                       couplings=(), fields=(), mixer: str = "ring") -> Circuit:
    """Cost phase then XY ring mixer per layer.

    ``mixer="ring"`` applies the ring as XY-pair sublayers (odd pairs, even
    pairs, wrap pair); ``"exact"`` applies exp(-i beta H_ring) per group.
    ``couplings`` and ``fields`` list the Ising ZZ pairs and Z terms the cost
    layer would compile to. They carry noise only; the phase itself is
    applied exactly from ``energies``. The exact mixer likewise carries its
    noise on one no-op per ring edge.
    """
    energies = np.asarray(energies, dtype=float)
    groups = _groups_for(energies, groups)
    if len(gammas) != len(betas) or len(gammas) < 1:
        raise InvalidParameterError("gammas and betas must have the same positive length")
    if mixer not in MIXERS:
        raise InvalidParameterError(f"unknown mixer {mixer!r}")
    n = int(sum(groups))
    base = initial_state(groups, init)
    circ = Circuit(n, base.copy)
    offsets = np.concatenate([[0], np.cumsum(groups)])
    for gamma, beta in zip(gammas, betas):
        circ.add("cost", (), lambda s, g=gamma: apply_cost_phase(s, energies, g))
        for i, j in couplings:
            circ.add("zz", (i, j), _noop)
        for i in fields:
            circ.add("rz", (i,), _noop)
        for g, D in enumerate(groups):
            o = int(offsets[g])
            if mixer == "exact":
                if D >= 2:
                    U = ring_mixer_unitary(D, beta)
                    circ.add("xy-ring", (), lambda s, o=o, U=U: apply_block_unitary(s, o, U))
                for a, b in ring_pairs(D):
                    circ.add("xy", (o + a, o + b), _noop)
                continue
            for a, b in ring_pairs(D):
                circ.add("xy", (o + a, o + b), lambda s, a=o + a, b=o + b, bt=beta: apply_xy_pair(s, a, b, bt))
    return circ


def _noop(state):
    return state


def qaoa_circuit(energies, gammas, betas, init: str = "w_state", groups=None,
                 mixer: str = "ring") -> Statevector:
    return build_qaoa_circuit(energies, gammas, betas, init, groups, mixer=mixer).run()


def gate_count_report(D: int, p: int, nnz: int) -> tuple[int, int]:
    """(mixer two-qubit interactions, cost two-qubit couplings) for p layers."""
    mixer = p * D if D >= 2 else 0
    return mixer, p * nnz


def _one_hot_energies(qubo) -> np.ndarray:
    return np.diag(qubo.Q) + qubo.c


def exhaustive_group(qubo: GroupQubo) -> SolveReport:
    if qubo.n > GROUP_ENUMERATION_CAP:
        raise CapacityError(f"{qubo.n} candidates exceed the enumeration cap")
    values = _one_hot_energies(qubo)
    r = int(np.argmin(values))
    return SolveReport((r,), float(values[r]), delta=0.0, n_qubits=0)


def joint_energy_table(joint: JointQubo) -> np.ndarray:
    """F over every one-hot combination, as a tensor indexed by (r_1, ..., r_k)."""
    sizes = joint.groups
    if float(np.prod([float(s) for s in sizes])) > JOINT_ENUMERATION_CAP:
        raise CapacityError(f"{' x '.join(map(str, sizes))} one-hot combinations exceed "
                            f"the {JOINT_ENUMERATION_CAP:.0e} enumeration cap")
    k = len(sizes)
    table = np.zeros(sizes)
    for g in range(k):
        block = joint.diagonal_block(g)
        shape = [1] * k
        shape[g] = sizes[g]
        table = table + _one_hot_energies(block).reshape(shape)
        for h in range(g + 1, k):
            R = joint.coupling(g, h) + joint.coupling(h, g).T
            shape = [1] * k
            shape[g], shape[h] = sizes[g], sizes[h]
            table = table + R.reshape(shape)
    return table


def exhaustive_joint(joint: JointQubo) -> tuple[tuple, float]:
    table = joint_energy_table(joint)
    flat = int(np.argmin(table))
    return tuple(int(i) for i in np.unravel_index(flat, table.shape)), float(table.flat[flat])


def _noise_carriers(qubo):
    h, J, _ = ising_form(qubo)
    pairs = [tuple(int(v) for v in ij) for ij in np.argwhere(np.abs(J) > 1e-15)]
    fields = [int(i) for i in np.flatnonzero(np.abs(h) > 1e-15)]
    return pairs, fields


def qaoa_solve(qubo, cfg: QaoaConfig = QaoaConfig(), rng: np.random.Generator | None = None) -> SolveReport:
    """Derivative-free QAOA parameter search, then best feasible sample.

    Works for a single group or a joint QUBO (one ring mixer per group).
    """
    rng = rng if rng is not None else np.random.default_rng(0)
    groups = tuple(qubo.groups)
    n = int(sum(groups))
    if n > 20:
        raise CapacityError(f"{n} decision qubits exceed the simulator capacity")
    energies = to_diagonal_energies(qubo)
    feasible = feasible_mask(groups)
    optimum = float(energies[feasible].min())
    gates = gate_count_report(max(groups), cfg.p, coupling_count(qubo))
    if all(D == 1 for D in groups):
        sel = tuple(0 for _ in groups)
        return SolveReport(sel, optimum, delta=0.0, gate_counts=gates, n_qubits=n)

    p = cfg.p
    couplings, fields = ([], []) if cfg.exact_search else _noise_carriers(qubo)
    shots_per_eval = max(1, cfg.shots // cfg.max_evaluations)
    pool = []
    history = []

    def evaluate(params):
        circ = build_qaoa_circuit(energies, params[:p], params[p:], cfg.init, groups, couplings, fields,
                                  cfg.mixer)
        if cfg.exact_search:
            value = float(circ.run().probabilities() @ energies)
        else:
            res = circ.sample(shots_per_eval, cfg.noise, rng, cfg.trajectories)
            pool.append(res)
            value = float(res.hits @ energies[res.outcomes]) / res.shots
        history.append(value)
        return value

    gs = np.linspace(0.0, np.pi, cfg.grid, endpoint=False)
    bs = np.linspace(0.0, np.pi / 2, cfg.grid, endpoint=False)
    scored = []
    for gamma in gs:
        for beta in bs:
            params = np.array([gamma] * p + [beta] * p)
            scored.append((evaluate(params), len(scored), params))
    scored.sort(key=lambda t: (t[0], t[1]))

    best_val, _, best = scored[0]
    for start in range(cfg.restarts):
        val, _, x = scored[start] if start < len(scored) else scored[0]
        x = x.copy()
        step = np.array([np.pi / cfg.grid] * p + [np.pi / (2 * cfg.grid)] * p)
        used = 0
        while used < cfg.budget and step.max() > 1e-4:
            moved = False
            for i in range(2 * p):
                for sign in (1.0, -1.0):
                    if used >= cfg.budget:
                        break
                    trial = x.copy()
                    trial[i] += sign * step[i]
                    tv = evaluate(trial)
                    used += 1
                    if tv < val - 1e-14:
                        x, val, moved = trial, tv, True
                        break
                if moved:
                    break
            if not moved:
                step *= 0.5
        if val < best_val:
            best_val, best = val, x

    if cfg.exact_search:
        final = build_qaoa_circuit(energies, best[:p], best[p:], cfg.init, groups, mixer=cfg.mixer).run()
        pool.append(sample_shots(final, cfg.shots, cfg.noise, rng))
    outcomes = np.concatenate([r.outcomes for r in pool])
    hits = np.concatenate([r.hits for r in pool])
    total = int(hits.sum())
    ok = feasible[outcomes]
    feasible_fraction = float(hits[ok].sum()) / total if total else 0.0
    fallback = not ok.any()
    if fallback:
        cand = np.flatnonzero(feasible)
    else:
        cand = np.unique(outcomes[ok])
    idx = int(cand[np.argmin(energies[cand])])
    energy_sel = float(energies[idx])
    return SolveReport(
        selection=decode_selection(groups, idx),
        energy=energy_sel,
        gammas=tuple(float(v) for v in best[:p]),
        betas=tuple(float(v) for v in best[p:]),
        feasible_fraction=feasible_fraction,
        delta=max(0.0, energy_sel - optimum),
        gate_counts=gates,
        n_qubits=n,
        shots=total,
        evaluations=len(history),
        fallback=fallback,
        history=history,
    )
