import numpy as np
import pytest
from scipy.linalg import expm

from qckmeans.errors import CapacityError, InvalidParameterError
from qckmeans.statevec import (
    Circuit,
    DiagonalOracle,
    Gate,
    NoiseModel,
    Statevector,
    apply_block_unitary,
    apply_controlled_diagonal,
    apply_cost_phase,
    apply_h,
    apply_noisy_gate,
    apply_sdg,
    apply_xy_pair,
    expectation_z,
    init_basis,
    init_zero,
    prepare_w_state,
    sample_shots,
)

S2 = 1 / np.sqrt(2)


def random_state(q, rng):
    v = rng.standard_normal(1 << q) + 1j * rng.standard_normal(1 << q)
    return Statevector(v / np.linalg.norm(v), q)


def test_init_zero():
    np.testing.assert_array_equal(init_zero(1).amplitudes, [1, 0])
    s = init_zero(3)
    assert s.amplitudes.shape == (8,) and s.amplitudes[0] == 1 and s.norm() == 1.0
    with pytest.raises(CapacityError):
        init_zero(0)
    with pytest.raises(CapacityError):
        init_zero(21)


def test_hadamard_and_sdg():
    s = apply_h(init_zero(1), 0)
    np.testing.assert_allclose(s.amplitudes, [S2, S2], atol=1e-15)
    np.testing.assert_allclose(apply_sdg(s, 0).amplitudes, [S2, -1j * S2], atol=1e-15)
    with pytest.raises(InvalidParameterError):
        apply_h(init_zero(2), 2)


def test_hh_identity(rng):
    s = random_state(4, rng)
    orig = s.amplitudes.copy()
    for q in range(4):
        apply_h(apply_h(s, q), q)
    np.testing.assert_allclose(s.amplitudes, orig, atol=1e-12)


def test_controlled_diagonal_cases(rng):
    theta = rng.uniform(0, 2 * np.pi, 4)
    # control on qubit 2 left at |0>: unchanged
    s = apply_h(apply_h(init_zero(3), 0), 1)
    before = s.amplitudes.copy()
    apply_controlled_diagonal(s, DiagonalOracle.padded(theta, 2), 2, (0, 1))
    np.testing.assert_allclose(s.amplitudes, before)
    # zero phases: unchanged
    s = random_state(3, rng)
    before = s.amplitudes.copy()
    apply_controlled_diagonal(s, DiagonalOracle.padded(np.zeros(3), 2), 2, (0, 1))
    np.testing.assert_allclose(s.amplitudes, before)
    # theta = (pi, 0, ...) negates the amplitude at control=1, index 0
    s = random_state(3, rng)
    before = s.amplitudes.copy()
    apply_controlled_diagonal(s, DiagonalOracle.padded([np.pi], 2), 2, (0, 1))
    expected = before.copy()
    expected[0b100] *= -1
    np.testing.assert_allclose(s.amplitudes, expected, atol=1e-15)


def test_controlled_diagonal_per_amplitude(rng):
    theta = rng.uniform(0, 2 * np.pi, 5)
    oracle = DiagonalOracle.padded(theta, 3)
    assert np.all(oracle.phases[5:] == 0)
    s = random_state(4, rng)
    before = s.amplitudes.copy()
    apply_controlled_diagonal(s, oracle, 3, (0, 1, 2))
    for b in range(16):
        f = np.exp(1j * oracle.phases[b & 7]) if b >> 3 else 1.0
        assert abs(s.amplitudes[b] - f * before[b]) <= 1e-14
    np.testing.assert_allclose(np.abs(s.amplitudes[:8]), np.abs(before[:8]))


def test_oracle_rejects_overflow():
    with pytest.raises(InvalidParameterError):
        DiagonalOracle.padded(np.zeros(5), 2)


def test_cost_phase(rng):
    s = random_state(3, rng)
    before = s.amplitudes.copy()
    apply_cost_phase(s, rng.standard_normal(8), 0.0)
    np.testing.assert_allclose(s.amplitudes, before)
    apply_cost_phase(s, np.full(8, 2.7), 0.9)
    np.testing.assert_allclose(s.probabilities(), np.abs(before) ** 2, atol=1e-14)
    e = rng.standard_normal(8)
    s = Statevector(before.copy(), 3)
    apply_cost_phase(s, e, 0.37)
    for b in range(8):
        assert abs(s.amplitudes[b] - before[b] * np.exp(-1j * 0.37 * e[b])) <= 1e-14


def test_xy_pair_examples():
    s = init_basis(2, 0b10)
    apply_xy_pair(s, 0, 1, np.pi / 4)
    np.testing.assert_allclose(s.amplitudes, [0, -1j, 0, 0], atol=1e-15)
    s = init_basis(2, 0b01)
    apply_xy_pair(s, 0, 1, 0.0)
    np.testing.assert_array_equal(s.amplitudes, [0, 1, 0, 0])


def test_xy_pair_matches_matrix_exponential(rng):
    X = np.array([[0, 1], [1, 0]])
    Y = np.array([[0, -1j], [1j, 0]])
    for beta in rng.uniform(-np.pi, np.pi, 5):
        U = expm(-1j * beta * (np.kron(X, X) + np.kron(Y, Y)))
        np.testing.assert_allclose(U.conj().T @ U, np.eye(4), atol=1e-12)
        s = random_state(2, rng)
        expected = U @ s.amplitudes
        apply_xy_pair(s, 0, 1, beta)
        np.testing.assert_allclose(s.amplitudes, expected, atol=1e-12)


def test_xy_preserves_weight_classes(rng):
    q = 6
    s = random_state(q, rng)
    weights = np.array([bin(b).count("1") for b in range(1 << q)])

    def mass(st):
        return np.bincount(weights, weights=st.probabilities(), minlength=q + 1)

    before = mass(s)
    for _ in range(20):
        a, b = rng.choice(q, 2, replace=False)
        apply_xy_pair(s, int(a), int(b), float(rng.uniform(0, np.pi)))
    np.testing.assert_allclose(mass(s), before, atol=1e-12)
    assert abs(s.norm() - 1) <= 1e-10


def test_w_state():
    np.testing.assert_array_equal(prepare_w_state(1).amplitudes, [0, 1])
    s = prepare_w_state(3)
    expected = np.zeros(8)
    expected[[1, 2, 4]] = 1 / np.sqrt(3)
    np.testing.assert_allclose(s.amplitudes, expected)
    assert abs(s.probabilities()[[1, 2, 4]].sum() - 1) <= 1e-15


def test_expectation_z(rng):
    assert expectation_z(init_zero(1), 0) == 1.0
    assert abs(expectation_z(apply_h(init_zero(1), 0), 0)) <= 1e-12
    s = random_state(4, rng)
    p = s.probabilities()
    for q in range(4):
        p0 = sum(p[b] for b in range(16) if not (b >> q) & 1)
        assert abs(expectation_z(s, q) - (2 * p0 - 1)) <= 1e-12


def test_sample_basis_state():
    res = sample_shots(init_basis(3, 5), 100, rng=np.random.default_rng(0))
    assert res.counts == {"101": 100}


def test_sample_uniform_frequencies():
    s = apply_h(apply_h(init_zero(2), 0), 1)
    res = sample_shots(s, 100_000, rng=np.random.default_rng(3))
    sigma = np.sqrt(0.25 * 0.75 / 100_000)
    for bits in ("00", "01", "10", "11"):
        assert abs(res.counts[bits] / 100_000 - 0.25) <= 4 * sigma
    assert res.shots == 100_000


def test_readout_flip_all():
    res = sample_shots(init_zero(1), 50, NoiseModel(p_ro=1.0), np.random.default_rng(0))
    assert res.counts == {"1": 50}


def test_sampling_reproducible(rng):
    s = random_state(3, rng)
    a = sample_shots(s, 500, NoiseModel(p_ro=0.1), np.random.default_rng(9))
    b = sample_shots(s, 500, NoiseModel(p_ro=0.1), np.random.default_rng(9))
    assert a.counts == b.counts


def test_noisy_gate_zero_noise_is_ideal(rng):
    s = random_state(2, rng)
    ideal = apply_h(s.copy(), 1)
    apply_noisy_gate(s, Gate("h", (1,), lambda st: apply_h(st, 1)), NoiseModel(), rng)
    np.testing.assert_allclose(s.amplitudes, ideal.amplitudes)


def test_noisy_gate_forced_pauli(rng):
    s = init_zero(1)
    ideal = apply_h(init_zero(1), 0).amplitudes
    apply_noisy_gate(s, Gate("h", (0,), lambda st: apply_h(st, 0)), NoiseModel(p1=1.0), rng)
    paulis = [np.array([[0, 1], [1, 0]]), np.array([[0, -1j], [1j, 0]]), np.diag([1, -1])]
    assert any(np.allclose(s.amplitudes, P @ ideal) for P in paulis)
    assert not np.allclose(s.amplitudes, ideal)


def test_trajectory_average_depolarized():
    # <Z> after H is 0 and stays 0 under a depolarizing channel
    circ = Circuit(1, lambda: init_zero(1)).add("h", (0,), lambda st: apply_h(st, 0))
    gen = np.random.default_rng(5)
    noise = NoiseModel(p1=0.1)
    values = [expectation_z(circ.run(noise, gen), 0) for _ in range(10_000)]
    assert abs(np.mean(values)) <= 0.02


def test_trajectory_replay_matches_direct_application(rng):
    # with p = 1 every gate is hit; compare the replay with noisy run on same event draws
    circ = Circuit(2, lambda: init_zero(2))
    circ.add("h", (0,), lambda st: apply_h(st, 0))
    circ.add("xy", (0, 1), lambda st: apply_xy_pair(st, 0, 1, 0.4))
    circ.add("h", (1,), lambda st: apply_h(st, 1))
    noise = NoiseModel(p1=0.5, p2=0.5)
    for seed in range(10):
        a = circ.trajectory(noise, np.random.default_rng(seed))
        assert abs(a.norm() - 1) <= 1e-12
    quiet = circ.trajectory(NoiseModel(1e-12, 1e-12), np.random.default_rng(0))
    np.testing.assert_allclose(quiet.amplitudes, circ.run().amplitudes)


def test_noise_model_validation():
    with pytest.raises(InvalidParameterError):
        NoiseModel(p1=1.5)
    assert NoiseModel.parse("0.001,0.01,0.02") == NoiseModel(0.001, 0.01, 0.02)
    with pytest.raises(InvalidParameterError):
        NoiseModel.parse("0.1,0.2")


@pytest.mark.parametrize("start,w", [(0, 1), (1, 2), (2, 2), (0, 4)])
def test_block_unitary_matches_kron(rng, start, w):
    q = 4
    A = rng.standard_normal((1 << w, 1 << w)) + 1j * rng.standard_normal((1 << w, 1 << w))
    U = np.linalg.qr(A)[0]
    st = random_state(q, rng)
    dense = np.kron(np.kron(np.eye(1 << (q - start - w)), U), np.eye(1 << start))
    expected = dense @ st.amplitudes
    apply_block_unitary(st, start, U)
    np.testing.assert_allclose(st.amplitudes, expected, atol=1e-12)


def test_block_unitary_rejects_overhang():
    with pytest.raises(InvalidParameterError):
        apply_block_unitary(init_zero(3), 2, np.eye(4))
