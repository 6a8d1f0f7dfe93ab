"""Command-line entry point: generate, run, bench, ablate."""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, replace
from pathlib import Path

from .core import RngSpec
from .errors import QcKmeansError
from .pipeline import PipelineConfig, run_qc_kmeans
from .statevec import NoiseModel
from .bench.datasets import FAMILIES, SyntheticSpec, generate, load_csv, save_csv
from .bench.experiment import (
    ExperimentRow,
    RunManifest,
    ablate,
    ablation_to_csv,
    resolve_dataset,
    rows_to_csv,
    run_experiment,
)


def _add_data_args(p):
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--dataset", choices=FAMILIES, help="synthetic family")
    src.add_argument("--csv", type=Path, help="numeric CSV file")
    p.add_argument("--n", type=int, default=300, help="synthetic sample count")
    p.add_argument("--data-noise", type=float, default=0.05)
    p.add_argument("--data-seed", type=int, default=0)
    p.add_argument("--header", action="store_true", help="CSV has a header line")
    p.add_argument("--delimiter", default=",")


def _add_config_args(p):
    p.add_argument("--config", type=Path, help="JSON file mirroring PipelineConfig")
    p.add_argument("--k", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--candidates", dest="D", type=int)
    p.add_argument("--depth", dest="p", type=int)
    p.add_argument("--subsample", dest="B", type=int)
    p.add_argument("--shots", dest="qaoa_shots", type=int, help="QAOA shot budget per solve")
    p.add_argument("--qff-shots", dest="qff_shots", type=int, help="shots per basis per frequency")
    p.add_argument("--epsilon", type=float)
    p.add_argument("--refine", type=int)
    p.add_argument("--tau", type=float)
    p.add_argument("--solver", choices=("qaoa", "exhaustive"))
    p.add_argument("--formulation", choices=("grouped", "coupled"))
    p.add_argument("--noise", type=NoiseModel.parse, metavar="P1,P2,P_RO")
    p.add_argument("--analytic", action="store_true", default=None)
    p.add_argument("--seed", type=int, default=0)


def _config(args) -> PipelineConfig:
    base = {}
    if args.config is not None:
        base = json.loads(args.config.read_text())
    cfg = PipelineConfig.from_dict(base)
    keys = ("k", "m", "D", "p", "B", "qaoa_shots", "qff_shots", "epsilon", "refine", "tau",
            "solver", "formulation", "noise", "analytic")
    overrides = {k: getattr(args, k) for k in keys if getattr(args, k, None) is not None}
    return replace(cfg, **overrides)


def _data(args):
    if args.csv is not None:
        return load_csv(args.csv, args.delimiter, args.header)
    return generate(SyntheticSpec(args.dataset, args.n, args.data_noise, args.data_seed))


def cmd_generate(args):
    spec = SyntheticSpec(args.family, args.n, args.noise, args.seed, blobs=args.blobs,
                         variances=tuple(args.variances or ()))
    save_csv(generate(spec), args.out)
    print(f"wrote {spec.n} points to {args.out}")


def cmd_run(args):
    data = _data(args)
    cfg = _config(args)
    res = run_qc_kmeans(data, cfg, RngSpec(args.seed))
    row = ExperimentRow(data.name, data.N, data.d, res.method, cfg.k, args.seed, res.sse, res.m,
                        res.q_peak, round(res.wall_time, 6), res.total_shots)
    print(rows_to_csv([row]), end="")
    if args.out is not None:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "rows.csv").write_text(rows_to_csv([row]))
        (out / "trace.json").write_text(json.dumps({
            "config": cfg.to_dict(),
            "seed": args.seed,
            "centroids": res.centroids.tolist(),
            "sse": res.sse,
            "q_peak": res.q_peak,
            "iterations": res.iterations,
            "total_shots": res.total_shots,
            "trace": res.trace,
        }, indent=2) + "\n")


def cmd_bench(args):
    manifest = RunManifest.load(args.manifest)
    out = args.out or Path("results") / manifest.name
    rows = run_experiment(manifest, out)
    failed = [r for r in rows if r.error]
    print(f"{len(rows)} rows written to {out} ({len(failed)} failed)")
    for r in failed:
        print(f"  {r.dataset} {r.method} k={r.k} seed={r.seed}: {r.error}", file=sys.stderr)


def cmd_ablate(args):
    data = _data(args)
    cfg = _config(args)
    k = args.k if args.k is not None else 3
    D = args.D if args.D is not None else 4
    rows = []
    for seed in args.seeds or [args.seed]:
        rows += ablate(data, k, D, cfg, seed)
    text = ablation_to_csv(rows)
    print(text, end="")
    if args.out is not None:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        Path(args.out).write_text(text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qckmeans", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a synthetic dataset to CSV")
    g.add_argument("family", choices=FAMILIES)
    g.add_argument("--n", type=int, default=300)
    g.add_argument("--noise", type=float, default=0.05)
    g.add_argument("--blobs", type=int, default=3)
    g.add_argument("--variances", type=float, nargs="+")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", type=Path, required=True)
    g.set_defaults(func=cmd_generate)

    r = sub.add_parser("run", help="single pipeline run")
    _add_data_args(r)
    _add_config_args(r)
    r.add_argument("--out", type=Path, help="directory for rows.csv and trace.json")
    r.set_defaults(func=cmd_run)

    b = sub.add_parser("bench", help="manifest-driven experiment grid")
    b.add_argument("--manifest", type=Path, required=True)
    b.add_argument("--out", type=Path)
    b.set_defaults(func=cmd_bench)

    a = sub.add_parser("ablate", help="grouped vs coupled vs exhaustive")
    _add_data_args(a)
    _add_config_args(a)
    a.add_argument("--seeds", type=int, nargs="+")
    a.add_argument("--out", type=Path, help="CSV output path")
    a.set_defaults(func=cmd_ablate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except QcKmeansError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
