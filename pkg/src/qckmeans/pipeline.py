"""End-to-end qc-kmeans: sketch, seed, select candidates by QUBO, refine."""
from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass, fields

import numpy as np

from .core import (
    ClusteringResult,
    Dataset,
    FrequencyMatrix,
    as_rng,
    assign_nearest,
    sample_frequencies,
    sse,
    standardize,
)
from .errors import InvalidParameterError
from .qubo import CandidateSet, build_group_qubo, build_joint_qubo
from .sketch import QffConfig, QffRegisters, Sketch, exact_sketch, qff_estimate_sketch
from .solver import QaoaConfig, exhaustive_group, exhaustive_joint, qaoa_solve
from .statevec import NoiseModel


@dataclass(frozen=True)
class PipelineConfig:
    k: int = 3
    m: int | None = None  # None: 4 k d
    D: int = 6
    p: int = 1
    B: int = 256
    qff_shots: int = 1024
    qaoa_shots: int = 10_000
    epsilon: float = 1e-3
    refine: int = 5
    tau: float = 1e-3
    jitter: float = 0.5
    decay: float = 0.7
    solver: str = "qaoa"
    formulation: str = "grouped"
    sketch: str = "qff"
    analytic: bool = False
    noise: NoiseModel | None = None
    sigma: float = 1.0
    seed_iters: int = 10
    init: str = "w_state"
    mixer: str = "ring"
    grid: int = 8
    search_budget: int = 60
    trajectories: int = 16

    def __post_init__(self):
        if self.k < 1 or self.D < 1 or self.p < 1 or self.B < 1:
            raise InvalidParameterError("k, D, p and B must be positive")
        if self.tau < 0 or self.refine < 0 or self.jitter < 0:
            raise InvalidParameterError("tau, refine and jitter must be non-negative")
        if not 0 < self.decay <= 1:
            raise InvalidParameterError("decay must lie in (0, 1]")
        if self.solver not in ("qaoa", "exhaustive"):
            raise InvalidParameterError(f"unknown solver {self.solver!r}")
        if self.formulation not in ("grouped", "coupled"):
            raise InvalidParameterError(f"unknown formulation {self.formulation!r}")
        if self.sketch not in ("qff", "exact"):
            raise InvalidParameterError(f"unknown sketch mode {self.sketch!r}")
        if self.m is not None and self.m < 1:
            raise InvalidParameterError("m must be positive")

    def frequency_count(self, d: int) -> int:
        return self.m if self.m is not None else 4 * self.k * d

    def qaoa(self) -> QaoaConfig:
        return QaoaConfig(p=self.p, shots=self.qaoa_shots, init=self.init, mixer=self.mixer, grid=self.grid,
                          budget=self.search_budget, noise=self.noise, trajectories=self.trajectories)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["noise"] = None if self.noise is None else [self.noise.p1, self.noise.p2, self.noise.p_ro]
        return out

    @classmethod
    def from_dict(cls, obj: dict) -> "PipelineConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(obj) - known
        if unknown:
            raise InvalidParameterError(f"unknown config keys: {sorted(unknown)}")
        obj = dict(obj)
        noise = obj.get("noise")
        if noise is not None and not isinstance(noise, NoiseModel):
            obj["noise"] = NoiseModel(**noise) if isinstance(noise, dict) else NoiseModel(*noise)
        return cls(**obj)


def q_peak(D: int, B: int) -> int:
    if D < 1 or B < 1:
        raise InvalidParameterError("D and B must be positive")
    return max(D, QffRegisters.for_subsample(B).n_i + 1)


def seed_centroids(data, k: int, rng=None, max_iter: int = 10) -> np.ndarray:
    """Lloyd's k-means (single restart, capped iterations) on standardized data."""
    from .bench.baselines import lloyd_kmeans

    X = data.points if isinstance(data, Dataset) else np.asarray(data, dtype=float)
    if X.shape[0] < k:
        raise InvalidParameterError(f"need at least k={k} points, got {X.shape[0]}")
    gen = as_rng(rng).stream("seeding")
    return lloyd_kmeans(X, k, restarts=1, max_iter=max_iter, rng=gen).centroids


def generate_candidates(centers, D: int, scale: float, elite=None, rng=None,
                        W: FrequencyMatrix | None = None) -> CandidateSet:
    """D candidates per group: Gaussian jitter around each center.

    With ``elite`` given, slot 0 of group g is ``elite[g]`` verbatim.
    """
    if D < 1:
        raise InvalidParameterError("D must be positive")
    centers = np.atleast_2d(np.asarray(centers, dtype=float))
    gen = rng if isinstance(rng, np.random.Generator) else as_rng(rng).stream("jitter")
    groups = []
    for g, center in enumerate(centers):
        block = center + scale * gen.standard_normal((D, centers.shape[1]))
        if elite is not None:
            block[0] = elite[g]
        groups.append(block)
    if W is None:
        return CandidateSet(tuple(groups), tuple(np.empty((D, 0), dtype=complex) for _ in groups))
    return CandidateSet.from_centers(groups, W)


def surrogate_cost(selection, group_sketches, candidates: CandidateSet) -> np.ndarray:
    """||v_{g, r_g} - z_{X,g}||^2 per group (nan where the sketch is missing)."""
    out = np.full(len(selection), np.nan)
    for g, r in enumerate(selection):
        sk = group_sketches[g]
        if sk is None:
            continue
        z = sk.z if isinstance(sk, Sketch) else np.asarray(sk)
        diff = candidates.features[g][r] - z
        out[g] = float(np.vdot(diff, diff).real)
    return out


def _movement(a, b) -> float:
    return float(np.linalg.norm(np.asarray(a) - np.asarray(b)))


class _Run:
    """State for one pipeline execution."""

    def __init__(self, data: Dataset, cfg: PipelineConfig, rng):
        self.cfg = cfg
        self.spec = as_rng(rng)
        self.data = data
        self.Xs, self.scaler = standardize(data)
        self.X = self.Xs.points
        N, d = self.X.shape
        if N < cfg.k:
            raise InvalidParameterError(f"need at least k={cfg.k} points, got {N}")
        self.W = sample_frequencies(cfg.frequency_count(d), d, cfg.sigma, self.spec)
        self.qff = QffConfig(min(cfg.B, N), cfg.qff_shots, cfg.analytic, cfg.trajectories)
        self.qaoa = cfg.qaoa()
        self.widths = [0]
        self.shots = 0

    def sketch(self, points, key, B=None) -> Sketch:
        if self.cfg.sketch == "exact":
            return exact_sketch(points, self.W)
        qff = self.qff if B is None else self.qff.with_B(B)
        sk = qff_estimate_sketch(points, self.W, qff, self.cfg.noise, self.spec, key)
        self.shots += sk.shots
        self.widths.append(sk.width)
        return sk

    def group_sketches(self, assign, t):
        out = []
        for g in range(self.cfg.k):
            members = self.X[assign == g]
            if members.shape[0] == 0:
                out.append(None)
                continue
            out.append(self.sketch(members, ("iter", t, "group", g), min(self.qff.B, members.shape[0])))
        return out

    def solve_grouped(self, targets, cands, t):
        selection, deltas, reports = [], [], []
        for g in range(self.cfg.k):
            if targets[g] is None:
                # empty cluster: keep the incumbent in slot 0
                selection.append(0)
                deltas.append(0.0)
                reports.append(None)
                continue
            qubo = build_group_qubo(targets[g], cands.features[g], "normalized", self.cfg.epsilon)
            if self.cfg.solver == "exhaustive":
                rep = exhaustive_group(qubo)
            else:
                rep = qaoa_solve(qubo, self.qaoa, self.spec.stream("shots", "qaoa", t, g))
                self.shots += rep.shots
                self.widths.append(rep.n_qubits)
            selection.append(rep.selected)
            deltas.append((rep.delta or 0.0) * qubo.s_coef)
            reports.append(rep)
        return tuple(selection), deltas, reports

    def solve_coupled(self, z_X, cands, t):
        joint = build_joint_qubo(z_X, cands, "normalized", self.cfg.epsilon)
        if self.cfg.solver == "exhaustive":
            selection, _ = exhaustive_joint(joint)
            return selection, [0.0] * self.cfg.k, None
        rep = qaoa_solve(joint, self.qaoa, self.spec.stream("shots", "qaoa", t, "joint"))
        self.shots += rep.shots
        self.widths.append(rep.n_qubits)
        return rep.selection, [(rep.delta or 0.0) * joint.s_coef] * self.cfg.k, [rep]

    def execute(self) -> ClusteringResult:
        cfg = self.cfg
        t0 = time.perf_counter()
        z_X = self.sketch(self.X, ("global",))
        seeds = seed_centroids(self.X, cfg.k, self.spec, cfg.seed_iters)
        centers = seeds.copy()
        assign = assign_nearest(self.X, centers)
        trace, costs = [], []
        iterations = 0
        for t in range(cfg.refine + 1):
            targets = self.group_sketches(assign, t)
            scale = cfg.jitter * cfg.decay**t
            cands = generate_candidates(centers, cfg.D, scale, centers, self.spec.stream("jitter", t), self.W)
            if cfg.formulation == "grouped":
                selection, deltas, _ = self.solve_grouped(targets, cands, t)
            else:
                selection, deltas, _ = self.solve_coupled(z_X, cands, t)
            new_centers = cands.pick(selection)
            f_old = surrogate_cost([0] * cfg.k, targets, cands)
            f_new = surrogate_cost(selection, targets, cands)
            movement = _movement(new_centers, centers)
            trace.append({
                "iteration": t,
                "jitter": scale,
                "selection": [int(r) for r in selection],
                "retained": [bool(r == 0) for r in selection],
                "empty": [sk is None for sk in targets],
                "f_old": [None if np.isnan(v) else float(v) for v in f_old],
                "f_new": [None if np.isnan(v) else float(v) for v in f_new],
                "delta": [float(v) for v in deltas],
                "movement": movement,
            })
            costs.append([None if np.isnan(v) else float(v) for v in f_new])
            centers = new_centers
            iterations = t + 1
            if t >= 1 and movement <= cfg.tau:
                break
            assign = assign_nearest(self.X, centers)

        centroids = self.scaler.inverse(centers)
        final_assign = assign_nearest(self.data.points, centroids)
        decision = cfg.D if cfg.formulation == "grouped" else cfg.k * cfg.D
        return ClusteringResult(
            centroids=centroids,
            assignment=final_assign,
            sse=sse(self.data.points, centroids, final_assign),
            method="qc-kmeans",
            q_peak=max(decision, QffRegisters.for_subsample(self.qff.B).n_i + 1),
            max_register=max(self.widths),
            iterations=iterations,
            wall_time=time.perf_counter() - t0,
            total_shots=int(self.shots),
            m=self.W.m,
            surrogate_costs=costs,
            trace=trace,
        )


def run_qc_kmeans(data: Dataset, cfg: PipelineConfig = PipelineConfig(), rng=None) -> ClusteringResult:
    """Run the full pipeline; SSE and centroids are reported in the input space."""
    if not isinstance(data, Dataset):
        data = Dataset(data)
    return _Run(data, cfg, rng).execute()


def trace_to_json(result: ClusteringResult) -> str:
    return json.dumps({
        "method": result.method,
        "iterations": result.iterations,
        "q_peak": result.q_peak,
        "total_shots": result.total_shots,
        "trace": result.trace,
    }, indent=2)
