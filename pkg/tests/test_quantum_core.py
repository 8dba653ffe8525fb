import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import stats

from arsim import quantum_core as qc

SQ2 = math.sqrt(2)


def random_state(seed, N):
    rng = np.random.default_rng(seed)
    return qc.normalize(rng.standard_normal(N) + 1j * rng.standard_normal(N))


def rank_one(psi):
    return np.outer(psi, psi.conj())


@pytest.mark.parametrize("u,v,expected", [
    ([1, 0], [1, 0], 1), ([1, 0], [0, 1], 0), ([1 / SQ2, 1j / SQ2], [1 / SQ2, -1j / SQ2], 0)])
def test_inner_product_examples(u, v, expected):
    assert qc.inner_product(u, v) == pytest.approx(expected, abs=1e-15)


def test_inner_product_dimension_mismatch():
    with pytest.raises(ValueError):
        qc.inner_product([1, 0], [1, 0, 0, 0])


def test_normalize_examples():
    assert np.allclose(qc.normalize([2, 0]), [1, 0])
    assert np.allclose(qc.normalize([1, 1]), [1 / SQ2, 1 / SQ2])
    with pytest.raises(ValueError):
        qc.normalize([0, 0])


def test_trace_distance_pure_examples():
    psi = np.array([1, 0], complex)
    assert qc.trace_distance_pure(psi, psi) == 0
    assert qc.trace_distance_pure(psi, [0, 1]) == 1
    assert qc.trace_distance_pure(psi, [0.6, 0.8]) == pytest.approx(0.8, abs=1e-15)
    with pytest.raises(ValueError):
        qc.trace_distance_pure(psi, [1, 1])


def test_trace_distance_mixed_examples():
    assert qc.trace_distance_mixed(np.eye(2) / 2, np.eye(2) / 2) == 0
    assert qc.trace_distance_mixed(np.diag([1, 0]), np.diag([0, 1])) == pytest.approx(1)
    assert qc.trace_distance_mixed(np.diag([.5, .5]), np.diag([.75, .25])) == pytest.approx(0.25)
    with pytest.raises(ValueError):
        qc.trace_distance_mixed(np.diag([1, 1]), np.diag([1, 0]))


@given(st.integers(0, 2 ** 32), st.integers(1, 4))
def test_pure_and_mixed_trace_distances_agree(seed, n):
    psi, phi = random_state(seed, 1 << n), random_state(seed + 1, 1 << n)
    assert abs(qc.trace_distance_mixed(rank_one(psi), rank_one(phi))
               - qc.trace_distance_pure(psi, phi)) <= 1e-8


@given(st.integers(0, 2 ** 32), st.integers(1, 3))
def test_trace_distance_triangle_and_symmetry(seed, n):
    rng = np.random.default_rng(seed)
    rhos = [qc.ensemble_t_tensor(qc.haar_samples(n, 3, rng), rng.dirichlet(np.ones(3)), 1)
            for _ in range(3)]
    d = qc.trace_distance_mixed
    assert d(rhos[0], rhos[2]) <= d(rhos[0], rhos[1]) + d(rhos[1], rhos[2]) + 1e-8
    assert d(rhos[0], rhos[1]) == pytest.approx(d(rhos[1], rhos[0]), abs=1e-12)


def test_ensemble_examples():
    rho = qc.ensemble_t_tensor([[1, 0]], [1.0], 2)
    expected = np.zeros((4, 4))
    expected[0, 0] = 1
    assert np.allclose(rho, expected)
    assert np.allclose(qc.ensemble_t_tensor([[1, 0], [0, 1]], [.5, .5], 1), np.eye(2) / 2)
    with pytest.raises(ValueError):
        qc.ensemble_t_tensor([[1, 0], [0, 1]], [.6, .6], 1)
    with pytest.raises(ValueError):
        qc.ensemble_t_tensor(np.eye(16), np.full(16, 1 / 16), 4)


@given(st.integers(0, 2 ** 32), st.integers(1, 2), st.integers(1, 3), st.integers(1, 6))
def test_ensemble_is_density_matrix(seed, n, t, k):
    rng = np.random.default_rng(seed)
    rho = qc.ensemble_t_tensor(qc.haar_samples(n, k, rng), rng.dirichlet(np.ones(k)), t)
    qc.check_density_matrix(rho)


def test_tensor_power_matches_kron():
    psi = random_state(1, 4)
    assert np.allclose(qc.tensor_power(psi, 3), np.kron(np.kron(psi, psi), psi))
    assert np.allclose(qc.tensor_powers(psi[None], 3)[0], qc.tensor_power(psi, 3))


def test_haar_samples_are_unit_and_balanced():
    rng = np.random.default_rng(4)
    for n, expected in ((1, 0.5), (2, 0.25)):
        s = qc.haar_samples(n, 1_000_000, rng)
        assert np.max(np.abs(np.linalg.norm(s, axis=1) - 1)) <= 1e-12
        assert abs(np.mean(np.abs(s[:, 0]) ** 2) - expected) <= 0.002


def test_haar_sample_unitary_invariance():
    rng = np.random.default_rng(5)
    u, _ = np.linalg.qr(rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4)))
    a = qc.haar_samples(2, 100_000, rng)
    b = qc.haar_samples(2, 100_000, rng) @ u.T
    ks = stats.ks_2samp(np.abs(a[:, 0]) ** 2, np.abs(b[:, 0]) ** 2)
    critical = 1.628 * math.sqrt(2 / 100_000)  # 1% two-sample level
    assert ks.statistic < critical


def test_haar_moment_examples():
    assert np.allclose(qc.haar_moment(1, 1), np.eye(2) / 2)
    assert np.trace(qc.haar_moment(2, 2)).real == pytest.approx(1)
    qc.check_density_matrix(qc.haar_moment(2, 2))


def test_haar_moment_matches_sampling_entrywise():
    # independent Monte Carlo oracle, 10^6 draws
    rng = np.random.default_rng(6)
    acc = np.zeros((4, 4), complex)
    for _ in range(10):
        phi = qc.tensor_powers(qc.haar_samples(1, 100_000, rng), 2)
        acc += phi.T @ phi.conj()
    assert np.max(np.abs(acc / 1_000_000 - qc.haar_moment(1, 2))) <= 3e-3


def test_haar_moment_rank_is_symmetric_dimension():
    for n, t in ((1, 3), (2, 2), (2, 3)):
        P = qc.symmetric_projector(1 << n, t)
        assert np.allclose(P @ P, P)
        assert round(np.trace(P)) == math.comb((1 << n) + t - 1, t)


def test_haar_validation_rejects_wrong_moment():
    wrong = np.eye(4) / 4  # maximally mixed, not the symmetric moment
    with pytest.raises(RuntimeError):
        qc.validate_haar_moment(1, 2, wrong)


def test_dimension_cap():
    qc.check_dimension(4, 3)
    with pytest.raises(ValueError):
        qc.check_dimension(4, 4)
    with pytest.raises(ValueError):
        qc.haar_moment(4, 4)
