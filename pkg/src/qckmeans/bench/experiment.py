"""Manifest-driven experiment grid, ablation arms and result files."""
from __future__ import annotations

import csv
import io
import itertools
import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from .. import _kernels
from ..core import Dataset, RngSpec, sample_frequencies, standardize
from ..errors import CapacityError, InvalidParameterError, QcKmeansError
from ..pipeline import PipelineConfig, generate_candidates, run_qc_kmeans, seed_centroids
from ..qubo import build_joint_qubo, relaxation_gap_bounds
from ..sketch import exact_sketch
from ..solver import exhaustive_group, joint_energy_table
from .baselines import classical_ckm, lloyd_kmeans
from .datasets import SyntheticSpec, generate, load_csv

CSV_COLUMNS = ("dataset", "n", "d", "method", "k", "seed", "sse", "m", "q_peak", "time_s", "total_shots")
METHODS = ("qc-kmeans", "kmeans", "classical-ckm")
ABLATION_ARMS = ("grouped", "coupled", "exhaustive")
ABLATION_COLUMNS = ("dataset", "k", "D", "seed", "arm", "status", "sse", "q_peak", "surrogate_gap", "gap_bound")
VERSION = "0.1.0"


@dataclass
class ExperimentRow:
    dataset: str
    n: int
    d: int
    method: str
    k: int
    seed: int
    sse: float | None
    m: int
    q_peak: int
    time_s: float | None
    total_shots: int
    error: str = ""

    def csv_fields(self) -> list:
        out = []
        for name in CSV_COLUMNS:
            value = getattr(self, name)
            out.append("" if value is None else repr(value) if isinstance(value, float) else str(value))
        return out


@dataclass
class RunManifest:
    """What to run. ``datasets`` entries are generator specs or ``{"csv": path, ...}``.

    ``sweep`` maps PipelineConfig fields to value lists; every combination
    becomes extra grid cells. ``timing=None`` records wall time unless the
    config is analytic, so analytic reruns produce identical files.
    """

    datasets: list
    methods: list = field(default_factory=lambda: ["qc-kmeans", "kmeans"])
    ks: list = field(default_factory=lambda: [3])
    seeds: list = field(default_factory=lambda: [0])
    config: dict = field(default_factory=dict)
    sweep: dict = field(default_factory=dict)
    lloyd_restarts: int = 10
    timing: bool | None = None
    workers: int = 1
    ablation: dict | None = None
    name: str = "experiment"

    def __post_init__(self):
        unknown = set(self.methods) - set(METHODS)
        if unknown:
            raise InvalidParameterError(f"unknown methods {sorted(unknown)}; expected {METHODS}")
        if not self.datasets or not self.ks or not self.seeds:
            raise InvalidParameterError("datasets, ks and seeds must be non-empty")
        if self.workers < 1:
            raise InvalidParameterError("workers must be positive")
        PipelineConfig.from_dict(self.config)

    @classmethod
    def load(cls, path) -> "RunManifest":
        with open(path) as fh:
            obj = json.load(fh)
        try:
            return cls(**obj)
        except TypeError as exc:
            raise InvalidParameterError(f"bad manifest: {exc}") from None

    @property
    def base_config(self) -> PipelineConfig:
        return PipelineConfig.from_dict(self.config)

    @property
    def record_time(self) -> bool:
        return self.timing if self.timing is not None else not self.base_config.analytic

    def snapshot(self) -> dict:
        out = asdict(self)
        out["software"] = {"version": VERSION, "kernels": _kernels.BACKEND, "numpy": np.__version__}
        return out


def resolve_dataset(entry) -> Dataset:
    if isinstance(entry, Dataset):
        return entry
    entry = dict(entry)
    if "csv" in entry:
        data = load_csv(entry["csv"], entry.get("delimiter", ","), entry.get("header", False),
                        entry.get("columns"))
        return Dataset(data.points, entry.get("name", data.name))
    if "variances" in entry:
        entry["variances"] = tuple(entry["variances"])
    if "centers" in entry:
        entry["centers"] = tuple(tuple(c) for c in entry["centers"])
    return generate(SyntheticSpec(**entry))


def _sweep_configs(base: PipelineConfig, sweep: dict):
    if not sweep:
        return [base]
    keys = sorted(sweep)
    return [replace(base, **dict(zip(keys, combo))) for combo in itertools.product(*(sweep[k] for k in keys))]


def _run_cell(data, method, cfg, seed, restarts, record_time):
    base = ExperimentRow(data.name, data.N, data.d, method, cfg.k, seed, None, 0, 0, None, 0)
    try:
        t0 = time.perf_counter()
        if method == "kmeans":
            res = lloyd_kmeans(data, cfg.k, restarts=restarts, rng=RngSpec(seed))
            m = 0
        elif method == "classical-ckm":
            res = classical_ckm(data, cfg, RngSpec(seed))
            m = res.m
        else:
            res = run_qc_kmeans(data, cfg, RngSpec(seed))
            m = res.m
        elapsed = time.perf_counter() - t0
    except QcKmeansError as exc:
        base.error = f"{type(exc).__name__}: {exc}"
        return base
    base.sse = float(res.sse)
    base.m = int(m)
    base.q_peak = int(res.q_peak)
    base.time_s = round(elapsed, 6) if record_time else None
    base.total_shots = int(res.total_shots)
    return base


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in rows:
        w.writerow(r.csv_fields())
    return buf.getvalue()


def _plot_rows(rows):
    sse_m, time_q = {}, {}
    for r in rows:
        if r.sse is None:
            continue
        series = f"{r.dataset}/{r.method}/k={r.k}"
        sse_m.setdefault((series, r.m), []).append(r.sse)
        if r.time_s is not None and r.q_peak:
            time_q.setdefault((r.method, r.q_peak), []).append(r.time_s)

    def table(groups):
        return [(x, float(np.median(v)), s) for (s, x), v in sorted(groups.items(), key=lambda t: (t[0][0], t[0][1]))]

    return table(sse_m), table(time_q)


def _write_xy(path: Path, points):
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("x", "y", "series"))
        for x, y, s in points:
            w.writerow((x, repr(y), s))


def run_experiment(manifest: RunManifest, out_dir=None) -> list:
    """Run every (dataset x method x k x seed x sweep) cell.

    Failures are recorded on the row (``error``) instead of aborting. With
    ``out_dir`` the rows, plot data and a manifest snapshot are written there.
    """
    datasets = [resolve_dataset(e) for e in manifest.datasets]
    cells = []
    for data in datasets:
        for method in manifest.methods:
            for k in manifest.ks:
                configs = _sweep_configs(replace(manifest.base_config, k=k), manifest.sweep)
                if method == "kmeans":
                    configs = configs[:1]
                for cfg in configs:
                    for seed in manifest.seeds:
                        cells.append((data, method, cfg, seed))
    args = (manifest.lloyd_restarts, manifest.record_time)
    if manifest.workers > 1:
        with ThreadPoolExecutor(manifest.workers) as pool:
            rows = list(pool.map(lambda c: _run_cell(*c, *args), cells))
    else:
        rows = [_run_cell(*c, *args) for c in cells]

    ablation = None
    if manifest.ablation is not None:
        spec = dict(manifest.ablation)
        data = resolve_dataset(spec.pop("dataset")) if "dataset" in spec else datasets[0]
        ablation = []
        for seed in spec.pop("seeds", manifest.seeds):
            ablation += ablate(data, spec.get("k", 3), spec.get("D", 4), replace(manifest.base_config), seed)

    if out_dir is not None:
        write_outputs(Path(out_dir), manifest, rows, ablation)
    return rows


def write_outputs(out: Path, manifest: RunManifest, rows, ablation=None):
    out.mkdir(parents=True, exist_ok=True)
    (out / "rows.csv").write_text(rows_to_csv(rows))
    (out / "rows.json").write_text(json.dumps([asdict(r) for r in rows], indent=2) + "\n")
    (out / "manifest.json").write_text(json.dumps(manifest.snapshot(), indent=2, default=str) + "\n")
    sse_m, time_q = _plot_rows(rows)
    _write_xy(out / "sse_vs_m.csv", sse_m)
    _write_xy(out / "time_vs_qpeak.csv", time_q)
    if ablation is not None:
        (out / "ablation.csv").write_text(ablation_to_csv(ablation))


@dataclass
class AblationRow:
    dataset: str
    k: int
    D: int
    seed: int
    arm: str
    status: str
    sse: float | None = None
    q_peak: int = 0
    surrogate_gap: float | None = None
    gap_bound: float | None = None


def surrogate_gap(data: Dataset, cfg: PipelineConfig, seed: int):
    """Joint-QUBO gap between the decoupled argmin and the joint optimum.

    Built on the first-iteration candidates and the exact global sketch.
    Returns (gap, 4 * sum of coupling max-norms); gap is None when the joint
    enumeration is out of reach.
    """
    spec = RngSpec(seed)
    Xs, _ = standardize(data)
    W = sample_frequencies(cfg.frequency_count(Xs.d), Xs.d, cfg.sigma, spec)
    seeds = seed_centroids(Xs, cfg.k, spec, cfg.seed_iters)
    cands = generate_candidates(seeds, cfg.D, cfg.jitter, seeds, spec.stream("jitter", 0), W)
    joint = build_joint_qubo(exact_sketch(Xs, W), cands, "normalized", cfg.epsilon)
    bound = relaxation_gap_bounds(joint)[1]
    table = joint_energy_table(joint)
    relaxed = tuple(exhaustive_group(joint.diagonal_block(g)).selected for g in range(joint.k))
    return float(table[relaxed] - table.min()), float(bound)


def ablate(data: Dataset, k: int = 3, D: int = 4, cfg: PipelineConfig | None = None, seed: int = 0) -> list:
    """Grouped, coupled and exhaustive arms on shared seeds and candidates."""
    cfg = replace(cfg or PipelineConfig(), k=k, D=D)
    arms = {
        "grouped": replace(cfg, formulation="grouped"),
        "coupled": replace(cfg, formulation="coupled", solver="qaoa"),
        "exhaustive": replace(cfg, formulation="coupled", solver="exhaustive"),
    }
    try:
        gap, bound = surrogate_gap(data, cfg, seed)
    except CapacityError:
        gap, bound = None, None
    rows = []
    for arm in ABLATION_ARMS:
        row = AblationRow(data.name, k, D, seed, arm, "ok", surrogate_gap=gap, gap_bound=bound)
        try:
            res = run_qc_kmeans(data, arms[arm], RngSpec(seed))
            row.sse, row.q_peak = float(res.sse), int(res.q_peak)
        except CapacityError as exc:
            row.status = f"capacity error: {exc}"
        rows.append(row)
    return rows


def ablation_to_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(ABLATION_COLUMNS)
    for r in rows:
        w.writerow(["" if getattr(r, c) is None else repr(getattr(r, c)) if isinstance(getattr(r, c), float)
                    else str(getattr(r, c)) for c in ABLATION_COLUMNS])
    return buf.getvalue()
