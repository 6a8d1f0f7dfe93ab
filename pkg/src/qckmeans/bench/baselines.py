"""Classical baselines: Lloyd's k-means and the exact-sketch CKM arm."""
from __future__ import annotations

import time
from dataclasses import replace

import numpy as np

from ..core import ClusteringResult, Dataset, RngSpec, as_rng, assign_nearest, sse
from ..errors import InvalidParameterError


def kmeanspp_init(X: np.ndarray, k: int, gen: np.random.Generator) -> np.ndarray:
    """Distance-weighted seeding: each new center drawn with prob. ~ D(x)^2."""
    N = X.shape[0]
    chosen = [int(gen.integers(N))]
    d2 = ((X - X[chosen[0]]) ** 2).sum(axis=1)
    for _ in range(1, k):
        total = d2.sum()
        if total > 0:
            nxt = int(gen.choice(N, p=d2 / total))
        else:
            rest = np.setdiff1d(np.arange(N), chosen)
            nxt = int(gen.choice(rest))
        chosen.append(nxt)
        d2 = np.minimum(d2, ((X - X[nxt]) ** 2).sum(axis=1))
    return X[chosen].copy()


def _lloyd_once(X, k, max_iter, gen):
    C = kmeanspp_init(X, k, gen)
    assign = assign_nearest(X, C)
    history = []
    for it in range(max_iter):
        for g in range(k):
            members = X[assign == g]
            if members.shape[0]:
                C[g] = members.mean(axis=0)
        history.append(sse(X, C, assign))
        new = assign_nearest(X, C)
        if np.array_equal(new, assign):
            break
        assign = new
    return C, assign, history


def lloyd_kmeans(data, k: int, restarts: int = 10, max_iter: int = 300, rng=None) -> ClusteringResult:
    X = data.points if isinstance(data, Dataset) else np.asarray(data, dtype=float)
    if not 1 <= k <= X.shape[0]:
        raise InvalidParameterError(f"k={k} must lie in [1, N={X.shape[0]}]")
    if restarts < 1 or max_iter < 1:
        raise InvalidParameterError("restarts and max_iter must be positive")
    t0 = time.perf_counter()
    best = None
    for r in range(restarts):
        gen = rng if isinstance(rng, np.random.Generator) else as_rng(rng).stream("seeding", "lloyd", r)
        C, assign, history = _lloyd_once(X, k, max_iter, gen)
        value = sse(X, C, assign)
        if best is None or value < best[0]:
            best = (value, C, assign, history)
    value, C, assign, history = best
    return ClusteringResult(C, assign, value, method="kmeans", iterations=len(history),
                            wall_time=time.perf_counter() - t0, history=history)


def classical_ckm(data, cfg, rng=None) -> ClusteringResult:
    """The pipeline with exact sketches and exhaustive per-group solves."""
    from ..pipeline import run_qc_kmeans

    cfg = replace(cfg, sketch="exact", solver="exhaustive", noise=None)
    result = run_qc_kmeans(data, cfg, rng if rng is not None else RngSpec(0))
    result.method = "classical-ckm"
    return result
