"""Data model, standardization, random frequencies, feature maps and the
SSE/assignment primitives shared by every other module.
"""
from __future__ import annotations

import zlib
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import InvalidDataError, InvalidParameterError

SCALE_FLOOR = 1e-12


def _frozen(arr):
    arr = np.array(arr, dtype=np.float64, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Dataset:
    """An N x d matrix of finite reals."""

    points: np.ndarray
    name: str = ""

    def __post_init__(self):
        pts = np.asarray(self.points)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1)
        if pts.ndim != 2 or pts.shape[0] < 1 or pts.shape[1] < 1:
            raise InvalidDataError(f"expected a non-empty N x d matrix, got shape {pts.shape}")
        try:
            pts = _frozen(pts)
        except (TypeError, ValueError) as exc:
            raise InvalidDataError(f"non-numeric data: {exc}") from None
        if not np.all(np.isfinite(pts)):
            raise InvalidDataError("data contains non-finite entries")
        object.__setattr__(self, "points", pts)

    @property
    def N(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]

    def subset(self, mask) -> "Dataset":
        return Dataset(self.points[mask], self.name)


@dataclass(frozen=True)
class Standardizer:
    mean: np.ndarray
    scale: np.ndarray

    def transform(self, X):
        return (np.asarray(X, dtype=float) - self.mean) / self.scale

    def inverse(self, X):
        return np.asarray(X, dtype=float) * self.scale + self.mean


def standardize(data: Dataset) -> tuple[Dataset, Standardizer]:
    """Center and scale each column with the population standard deviation.

    Zero-variance columns get scale 1, so they map to all zeros.
    """
    if data.N < 2:
        raise InvalidDataError("standardization needs at least two samples")
    X = data.points
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    scale = np.where(std > SCALE_FLOOR * np.maximum(1.0, np.abs(mean)), std, 1.0)
    scaler = Standardizer(_frozen(mean), _frozen(scale))
    return Dataset(scaler.transform(X), data.name), scaler


def _label_code(label: str) -> int:
    return zlib.crc32(label.encode("utf-8"))


@dataclass(frozen=True)
class RngSpec:
    """Seed plus named, independently reseedable random streams.

    ``stream("shots", j, 1)`` always yields the same generator for the same
    seed, label and keys, regardless of what other streams were drawn.
    """

    seed: int = 0
    labels: tuple = ("frequencies", "subsampling", "shots", "jitter", "seeding")
    overrides: dict = field(default_factory=dict)

    def __post_init__(self):
        if not 0 <= int(self.seed) < 2**64:
            raise InvalidParameterError("seed must be a 64-bit unsigned integer")

    def stream(self, label: str, *keys) -> np.random.Generator:
        seed = self.overrides.get(label, self.seed)
        spawn_key = (_label_code(label),) + tuple(_label_code(str(k)) if not isinstance(k, int) else int(k) for k in keys)
        return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=spawn_key))

    def reseed(self, label: str, seed: int) -> "RngSpec":
        """Copy with one stream reseeded, leaving every other stream intact."""
        overrides = dict(self.overrides)
        overrides[label] = int(seed)
        return RngSpec(self.seed, self.labels, overrides)


def as_rng(rng) -> RngSpec:
    if isinstance(rng, RngSpec):
        return rng
    if rng is None:
        return RngSpec(0)
    return RngSpec(int(rng))


@dataclass(frozen=True)
class FrequencyMatrix:
    W: np.ndarray
    sigma: float = 1.0

    @property
    def m(self) -> int:
        return self.W.shape[0]

    @property
    def d(self) -> int:
        return self.W.shape[1]


def sample_frequencies(m: int, d: int, sigma: float = 1.0, rng=None) -> FrequencyMatrix:
    if m < 1 or d < 1:
        raise InvalidParameterError("m and d must be positive")
    if not sigma > 0:
        raise InvalidParameterError(f"sigma must be positive, got {sigma}")
    gen = as_rng(rng).stream("frequencies")
    return FrequencyMatrix(_frozen(sigma * gen.standard_normal((m, d))), float(sigma))


def feature_map(x, W) -> np.ndarray:
    """exp(i W x), elementwise; accepts a single point or an (n, d) batch."""
    Wm = W.W if isinstance(W, FrequencyMatrix) else np.asarray(W, dtype=float)
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != Wm.shape[1]:
        raise InvalidParameterError(f"dimension mismatch: point has {x.shape[-1]}, W has {Wm.shape[1]}")
    return np.exp(1j * (x @ Wm.T))


def _points(data):
    return data.points if isinstance(data, Dataset) else np.asarray(data, dtype=float)


def assign_nearest(data, centroids) -> np.ndarray:
    """Index of the nearest centroid per point; ties go to the lowest index."""
    X = np.ascontiguousarray(_points(data), dtype=np.float64)
    C = np.ascontiguousarray(np.atleast_2d(centroids), dtype=np.float64)
    if C.shape[0] < 1:
        raise InvalidParameterError("need at least one centroid")
    return _kernels.nearest(X, C)


def sse(data, centroids, assignment) -> float:
    X = _points(data)
    C = np.atleast_2d(np.asarray(centroids, dtype=float))
    diff = X - C[np.asarray(assignment)]
    return float(np.einsum("ij,ij->", diff, diff))


@dataclass
class ClusteringResult:
    """Centroids in the original input space plus run diagnostics.

    ``trace`` holds one record per outer iteration (pipeline) and
    ``history`` the per-iteration SSE of the best restart (Lloyd).
    """

    centroids: np.ndarray
    assignment: np.ndarray
    sse: float
    method: str = ""
    q_peak: int = 0
    max_register: int = 0
    iterations: int = 0
    wall_time: float = 0.0
    total_shots: int = 0
    m: int = 0
    surrogate_costs: list = field(default_factory=list)
    trace: list = field(default_factory=list)
    history: list = field(default_factory=list)

    @property
    def k(self) -> int:
        return self.centroids.shape[0]

    @property
    def sse_original(self) -> float:
        return self.sse
