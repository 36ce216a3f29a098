import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from smoothdiv import matcore as mc
from smoothdiv.config import tolerances
from smoothdiv.errors import DimensionCap, DomainError

from conftest import pure_pair, state_pairs


def random_hermitian(rng, d):
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return 0.5 * (g + g.conj().T)


def random_pd(rng, d):
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return g @ g.conj().T + 0.1 * np.eye(d)


def test_eig_diagonal_and_pauli():
    assert np.allclose(mc.eig_hermitian(np.diag([1.0, 0.0])).eigenvalues, [1, 0])
    assert np.allclose(mc.eig_hermitian([[0, 1], [1, 0]]).eigenvalues, [1, -1])


@pytest.mark.parametrize("d", [1, 2, 6, 17, 64])
def test_eig_reconstruction(rng, d):
    h = random_hermitian(rng, d)
    dec = mc.eig_hermitian(h)
    v, w = dec.eigenvectors, dec.eigenvalues
    assert np.all(np.diff(w) <= 0)
    assert np.linalg.norm(h - v @ np.diag(w) @ v.conj().T) <= 1e-9 * (1 + np.linalg.norm(h))
    assert np.allclose(v.conj().T @ v, np.eye(d), atol=1e-10)


def test_as_hermitian_rejects_bad_input():
    with pytest.raises(DomainError):
        mc.as_hermitian(np.ones((2, 3)))
    with pytest.raises(DomainError):
        mc.as_hermitian([[np.nan, 0], [0, 1]])


def test_as_state_checks_trace_and_positivity():
    with pytest.raises(DomainError):
        mc.as_state(np.diag([0.6, 0.6]))
    with pytest.raises(DomainError):
        mc.as_state(np.diag([1.2, -0.2]))
    mc.as_substate(np.diag([0.3, 0.2]))


def test_tolerance_override():
    rho = np.diag([0.5 + 5e-9, 0.5])
    with pytest.raises(DomainError):
        mc.as_state(rho)
    with tolerances(trace=1e-8):
        mc.as_state(rho)


@pytest.mark.parametrize("h, expected", [
    (np.diag([0.5, -0.2]), 0.5),
    (np.diag([1.0, 0.0]) - np.eye(2) / 2, 0.5),
    (np.array([[0, 1], [1, 0]]), 1.0),
])
def test_positive_part_trace_examples(h, expected):
    assert mc.positive_part_trace(h) == pytest.approx(expected, abs=1e-14)


def test_positive_part_trace_identity(rng):
    for d in range(1, 7):
        h = random_hermitian(rng, d)
        lhs = mc.positive_part_trace(h) - mc.positive_part_trace(-h)
        assert lhs == pytest.approx(np.trace(h).real, abs=1e-9)


def test_distances_identity():
    rho = mc.sample_state("hs_mixed", 3, 5)
    d = mc.distances(rho, rho)
    assert d.trace_dist == pytest.approx(0, abs=1e-12)
    assert d.gen_trace_dist == pytest.approx(0, abs=1e-12)
    assert d.fidelity == pytest.approx(1, abs=1e-10)
    assert d.purified_dist == pytest.approx(0, abs=1e-5)


def test_pure_fidelity():
    psi, phi = pure_pair(0.37)
    assert mc.distances(psi, phi).fidelity == pytest.approx(0.37, abs=1e-10)


def test_commuting_fidelity_is_bhattacharyya(classical_pair):
    p, q = classical_pair
    assert mc.distances(p, q).fidelity == pytest.approx(0.5 + math.sqrt(3) / 4, abs=1e-12)


def test_distances_requires_normalised_rho():
    with pytest.raises(DomainError):
        mc.distances(np.diag([0.4, 0.4]), np.diag([0.4, 0.4]))


@given(state_pairs(dims=(2, 3, 4, 5, 6)))
def test_fuchs_van_de_graaf(pair):
    rho, sigma = pair
    d = mc.distances(rho, 0.9 * sigma)
    assert 1 - math.sqrt(d.fidelity) <= d.gen_trace_dist + 1e-9
    assert d.gen_trace_dist <= math.sqrt(max(1 - d.fidelity, 0)) + 1e-9


def test_geometric_mean_examples():
    a = np.diag([2.0, 5.0])
    assert np.allclose(mc.geometric_mean(a, a), a, atol=1e-12)
    assert np.allclose(mc.geometric_mean(np.diag([4.0, 9.0]), np.eye(2)), np.diag([2, 3]))


def test_geometric_mean_with_inverse(rng):
    x = random_pd(rng, 4)
    assert np.allclose(mc.geometric_mean(x, np.linalg.inv(x)), np.eye(4), atol=1e-9)


def test_geometric_mean_symmetry_and_monotonicity(rng):
    for _ in range(200):
        d = int(rng.integers(2, 5))
        a, b = random_pd(rng, d), random_pd(rng, d)
        assert np.allclose(mc.geometric_mean(a, b), mc.geometric_mean(b, a), atol=1e-9)
    for _ in range(50):
        d = int(rng.integers(2, 5))
        a, b = random_pd(rng, d), random_pd(rng, d)
        g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        c = a + 0.3 * g @ g.conj().T
        diff = mc.geometric_mean(c, b) - mc.geometric_mean(a, b)
        assert mc.eigvalsh(diff)[0] >= -1e-9


def test_geometric_mean_singular_operand():
    a = np.diag([1.0, 0.0])
    b = np.diag([4.0, 3.0])
    assert np.allclose(mc.geometric_mean(a, b), np.diag([2.0, 0.0]), atol=1e-12)


def test_support_projector_examples():
    assert np.allclose(mc.support_projector(np.diag([1.0, 0.0])), np.diag([1, 0]))
    assert np.allclose(mc.support_projector(np.eye(2) / 2), np.eye(2))
    psi = mc.pure_state([0.6, 0.8j])
    assert np.allclose(mc.support_projector(psi), psi)


def test_tensor_power_and_partial_trace(rng):
    assert np.allclose(mc.tensor_power(np.diag([1.0, 0.0]), 2), np.diag([1, 0, 0, 0]))
    rho = mc.sample_state("hs_mixed", 2, 1)
    sigma = mc.sample_state("hs_mixed", 3, 2)
    joint = np.kron(rho, sigma)
    assert np.allclose(mc.partial_trace(joint, [2, 3], [0]), rho)
    assert np.allclose(mc.partial_trace(joint, [2, 3], [1]), sigma)
    two = mc.sample_state("hs_mixed", 4, 3)
    m = mc.partial_trace(two, [2, 2], [0])
    assert np.trace(m).real == pytest.approx(1.0)
    assert mc.eigvalsh(m)[0] >= -1e-12


def test_tensor_power_cap():
    with pytest.raises(DimensionCap):
        mc.tensor_power(np.eye(2) / 2, 13)


def test_sample_state_contracts():
    psi = mc.sample_state("haar_pure", 2, 7)
    assert np.linalg.matrix_rank(psi, tol=1e-10) == 1
    p = mc.sample_state("classical_dirichlet", 3, 7)
    assert np.allclose(p, np.diag(np.diag(p)))
    assert np.array_equal(mc.sample_state("hs_mixed", 4, 9), mc.sample_state("hs_mixed", 4, 9))
    with pytest.raises(DomainError):
        mc.sample_state("wishart", 2, 0)


@given(st.integers(1, 6), st.integers(0, 10 ** 6))
def test_sampled_states_are_states(d, seed):
    for kind in ("haar_pure", "hs_mixed", "classical_dirichlet"):
        rho = mc.sample_state(kind, d, seed)
        assert np.trace(rho).real == pytest.approx(1.0, abs=1e-12)
        assert mc.eigvalsh(rho)[0] >= -1e-12
