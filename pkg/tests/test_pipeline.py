import json

import numpy as np
import pytest

from qckmeans.bench import SyntheticSpec, generate, lloyd_kmeans
from qckmeans.core import Dataset, RngSpec, sample_frequencies
from qckmeans.errors import InvalidParameterError
from qckmeans.pipeline import (
    PipelineConfig,
    _Run,
    generate_candidates,
    q_peak,
    run_qc_kmeans,
    seed_centroids,
    surrogate_cost,
    trace_to_json,
)
from qckmeans.qubo import CandidateSet
from qckmeans.sketch import Sketch, exact_sketch
from qckmeans.statevec import NoiseModel


def blobs(n=150, seed=0, noise=0.3, centers=((-5, 0), (5, 0), (0, 8))):
    return generate(SyntheticSpec("blobs", n, noise, seed, centers=centers))


def test_q_peak():
    assert q_peak(6, 256) == 9
    assert q_peak(4, 2) == 4
    assert q_peak(1, 1) == 2
    with pytest.raises(InvalidParameterError):
        q_peak(0, 4)


def test_seed_centroids_k_equals_n(rng):
    X = rng.standard_normal((4, 2))
    seeds = seed_centroids(X, 4, RngSpec(0))
    assert sorted(map(tuple, seeds)) == sorted(map(tuple, X))
    with pytest.raises(InvalidParameterError):
        seed_centroids(X, 5)


def test_seed_centroids_find_blobs():
    centers = np.array([(-5, 0), (5, 0), (0, 8)], dtype=float)
    data = blobs(centers=tuple(map(tuple, centers)))
    half = min(np.linalg.norm(a - b) for i, a in enumerate(centers) for b in centers[i + 1:]) / 2
    for s in range(5):
        seeds = seed_centroids(data, 3, RngSpec(s))
        for c in centers:
            assert np.linalg.norm(seeds - c, axis=1).min() < half
    np.testing.assert_array_equal(seed_centroids(data, 3, RngSpec(1)), seed_centroids(data, 3, RngSpec(1)))


def test_candidates_zero_jitter_and_elite(rng):
    centers = rng.standard_normal((3, 2))
    cs = generate_candidates(centers, 4, 0.0, rng=RngSpec(0))
    for g in range(3):
        np.testing.assert_array_equal(cs.centers[g], np.tile(centers[g], (4, 1)))
    elite = rng.standard_normal((3, 2))
    cs = generate_candidates(centers, 4, 0.5, elite, RngSpec(0))
    for g in range(3):
        assert cs.centers[g][0].tobytes() == elite[g].tobytes()


def test_candidate_spread(rng):
    cs = generate_candidates(np.zeros((1, 2)), 10_000, 0.5, rng=RngSpec(3))
    std = cs.centers[0].std(axis=0, ddof=1)
    assert np.all(np.abs(std - 0.5) <= 0.05)


def test_candidate_features(rng):
    W = sample_frequencies(5, 2, 1.0, RngSpec(0))
    cs = generate_candidates(rng.standard_normal((2, 2)), 3, 0.2, rng=RngSpec(0), W=W)
    np.testing.assert_allclose(cs.features[1][2], np.exp(1j * W.W @ cs.centers[1][2]))


def test_surrogate_cost(rng):
    v = np.exp(1j * rng.uniform(0, 6, (2, 5)))
    cs = CandidateSet((np.zeros((2, 1)),), (v,))
    assert surrogate_cost([1], [Sketch(v[1])], cs)[0] == pytest.approx(0.0)
    assert surrogate_cost([0], [np.zeros(5)], cs)[0] == pytest.approx(5.0)
    z = rng.standard_normal(5) + 1j * rng.standard_normal(5)
    expected = sum(abs(a - b) ** 2 for a, b in zip(v[0], z))
    assert surrogate_cost([0], [z], cs)[0] == pytest.approx(expected, abs=1e-12)
    assert np.isnan(surrogate_cost([0], [None], cs)[0])


def test_degenerate_k1_pipeline(rng):
    data = Dataset(rng.normal(2.0, 3.0, (50, 2)))
    cfg = PipelineConfig(k=1, refine=0, jitter=0.0, solver="exhaustive", sketch="exact")
    res = run_qc_kmeans(data, cfg, RngSpec(0))
    lloyd = lloyd_kmeans(data, 1, rng=0)
    np.testing.assert_allclose(res.centroids[0], data.points.mean(axis=0), atol=1e-9)
    assert res.sse == pytest.approx(lloyd.sse, abs=1e-9)


def test_exhaustive_descent_in_trace():
    for s in range(4):
        data = blobs(90, s, 1.0)
        res = run_qc_kmeans(data, PipelineConfig(k=3, solver="exhaustive", B=32, qff_shots=128), RngSpec(s))
        for tr in res.trace:
            for old, new in zip(tr["f_old"], tr["f_new"]):
                if old is not None:
                    assert new <= old + 1e-12


def test_qaoa_descent_within_delta():
    data = blobs(90, 1, 1.0)
    res = run_qc_kmeans(data, PipelineConfig(k=3, D=4, B=32, qff_shots=128, qaoa_shots=500), RngSpec(2))
    for tr in res.trace:
        for old, new, delta in zip(tr["f_old"], tr["f_new"], tr["delta"]):
            assert new <= old + delta + 1e-9


def test_widest_register_matches_q_peak():
    data = generate(SyntheticSpec("circles", 300))
    res = run_qc_kmeans(data, PipelineConfig(k=3, D=6, B=256, analytic=True), RngSpec(0))
    assert res.q_peak == q_peak(6, 256) == 9
    assert res.max_register == res.q_peak
    res = run_qc_kmeans(data, PipelineConfig(k=3, D=12, B=16, analytic=True, refine=0), RngSpec(0))
    assert res.max_register == res.q_peak == 12


def test_termination_and_tolerance():
    data = blobs(60, 3, 0.5)
    for tau in (0.0, 1e-3, 10.0):
        res = run_qc_kmeans(data, PipelineConfig(k=3, refine=4, tau=tau, analytic=True), RngSpec(1))
        assert 1 <= res.iterations <= 5
        if res.iterations < 5:
            assert res.trace[-1]["movement"] <= tau


def test_empty_group_keeps_incumbent(rng):
    data = blobs(30, 0)
    run = _Run(data, PipelineConfig(k=2, D=3, solver="exhaustive", sketch="exact"), RngSpec(0))
    W = run.W
    cs = generate_candidates(rng.standard_normal((2, 2)), 3, 0.5, rng=RngSpec(0), W=W)
    target = exact_sketch(run.X[:5], W)
    selection, deltas, reports = run.solve_grouped([None, target], cs, 0)
    assert selection[0] == 0 and reports[0] is None and deltas[0] == 0.0


def test_deterministic_and_trace_json():
    data = blobs(60, 2)
    cfg = PipelineConfig(k=3, D=4, B=16, qff_shots=64, qaoa_shots=300)
    a = run_qc_kmeans(data, cfg, RngSpec(9))
    b = run_qc_kmeans(data, cfg, RngSpec(9))
    np.testing.assert_array_equal(a.centroids, b.centroids)
    obj = json.loads(trace_to_json(a))
    assert obj["iterations"] == len(obj["trace"]) == a.iterations
    rec = obj["trace"][0]
    assert {"selection", "f_old", "f_new", "movement", "retained", "delta"} <= set(rec)


def test_noisy_run_completes():
    data = blobs(45, 0)
    cfg = PipelineConfig(k=3, D=3, B=8, qff_shots=64, qaoa_shots=300, refine=1,
                         noise=NoiseModel(0.01, 0.02, 0.02), trajectories=4)
    res = run_qc_kmeans(data, cfg, RngSpec(0))
    assert np.isfinite(res.sse) and res.total_shots > 0


def test_coupled_formulation_runs():
    data = blobs(45, 0)
    res = run_qc_kmeans(data, PipelineConfig(k=3, D=3, refine=1, formulation="coupled",
                                             qaoa_shots=300, analytic=True), RngSpec(0))
    assert res.q_peak == 9 and res.max_register == 9


def test_config_validation_and_round_trip():
    with pytest.raises(InvalidParameterError):
        PipelineConfig(k=0)
    with pytest.raises(InvalidParameterError):
        PipelineConfig(decay=0.0)
    with pytest.raises(InvalidParameterError):
        PipelineConfig(tau=-1)
    with pytest.raises(InvalidParameterError):
        PipelineConfig(solver="anneal")
    with pytest.raises(InvalidParameterError):
        PipelineConfig.from_dict({"bogus": 1})
    cfg = PipelineConfig(k=4, noise=NoiseModel(0.1, 0.2, 0.3))
    assert PipelineConfig.from_dict(json.loads(json.dumps(cfg.to_dict()))) == cfg
    assert PipelineConfig(k=3).frequency_count(2) == 24
