"""Synthetic 2-d benchmark families and CSV ingestion."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from sklearn.datasets import make_blobs, make_circles, make_moons

from ..core import Dataset
from ..errors import InvalidParameterError, ParseError

FAMILIES = ("circles", "moons", "spiral", "blobs")


@dataclass(frozen=True)
class SyntheticSpec:
    """Generator settings.

    ``variances`` gives one isotropic variance per blob (``blobs`` only);
    unequal entries give the varied-variance variant. ``centers`` fixes blob
    locations, otherwise they are drawn in a [-10, 10] box.
    """

    family: str
    n: int = 300
    noise: float = 0.05
    seed: int = 0
    blobs: int = 3
    variances: tuple = ()
    centers: tuple = ()
    factor: float = 0.5
    arms: int = 2
    name: str = ""

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise InvalidParameterError(f"unknown family {self.family!r}; expected one of {FAMILIES}")
        if self.n < 4:
            raise InvalidParameterError("n must be at least 4")
        if self.noise < 0:
            raise InvalidParameterError("noise must be non-negative")
        if self.variances and len(self.variances) != self.blobs:
            raise InvalidParameterError("need one variance per blob")

    @property
    def label(self) -> str:
        return self.name or f"{self.family}-{self.n}"


def _spiral(n, arms, noise, gen):
    per = np.full(arms, n // arms)
    per[: n % arms] += 1
    parts = []
    for a, count in enumerate(per):
        t = np.sqrt(gen.uniform(0.0, 1.0, count)) * 3 * np.pi
        angle = t + 2 * np.pi * a / arms
        pts = np.column_stack([t * np.cos(angle), t * np.sin(angle)]) / (3 * np.pi)
        parts.append(pts + noise * gen.standard_normal(pts.shape))
    return np.vstack(parts)


def generate(spec: SyntheticSpec) -> Dataset:
    fam = spec.family
    if fam == "circles":
        X, _ = make_circles(spec.n, noise=spec.noise, factor=spec.factor, random_state=spec.seed)
    elif fam == "moons":
        X, _ = make_moons(spec.n, noise=spec.noise, random_state=spec.seed)
    elif fam == "spiral":
        X = _spiral(spec.n, spec.arms, spec.noise, np.random.default_rng(spec.seed))
    else:
        std = np.sqrt(spec.variances) if spec.variances else spec.noise
        centers = np.asarray(spec.centers, dtype=float) if spec.centers else spec.blobs
        X, _ = make_blobs(spec.n, n_features=2, centers=centers, cluster_std=std,
                          center_box=(-10.0, 10.0), random_state=spec.seed)
    return Dataset(X, spec.label)


def load_csv(path, delimiter: str = ",", header: bool = False, columns=None) -> Dataset:
    """Read a numeric matrix; ``columns`` selects fields by position."""
    path = Path(path)
    if not path.exists():
        raise ParseError(f"no such file: {path}")
    rows = []
    width = None
    with path.open(newline="") as fh:
        for lineno, fields in enumerate(csv.reader(fh, delimiter=delimiter), start=1):
            if header and lineno == 1:
                continue
            if not fields or all(not f.strip() for f in fields):
                continue
            if width is None:
                width = len(fields)
            elif len(fields) != width:
                raise ParseError(f"expected {width} fields, found {len(fields)}", lineno)
            picked = fields if columns is None else [fields[c] for c in columns if c < len(fields)]
            if columns is not None and len(picked) != len(columns):
                raise ParseError("selected column out of range", lineno)
            try:
                rows.append([float(v) for v in picked])
            except ValueError:
                raise ParseError(f"non-numeric field in {picked}", lineno) from None
    if not rows:
        raise ParseError(f"{path} has no data rows")
    return Dataset(np.array(rows), path.stem)


def save_csv(data: Dataset, path, header: bool = True) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        if header:
            w.writerow([f"x{j}" for j in range(data.d)])
        for row in data.points:
            w.writerow([repr(float(v)) for v in row])
