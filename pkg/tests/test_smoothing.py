import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from smoothdiv import divergences as dv
from smoothdiv import matcore as mc
from smoothdiv import smoothing as sm
from smoothdiv.errors import DimensionCap, DomainError, HypothesisViolated

from conftest import state_pairs


def split_at(rho, sigma, lam):
    """A = lam sigma and Q = (rho - lam sigma)_+, so rho <= A + Q."""
    w, v = np.linalg.eigh(rho - lam * sigma)
    q = (v * np.clip(w, 0, None)) @ v.conj().T
    return lam * sigma, q


def random_effect(rng, d):
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    h = g @ g.conj().T
    return h / (mc.eigvalsh(h)[-1] * 1.0000001)


def test_gentle_bounds_values():
    b = sm.gentle_bounds(0.1)
    assert b["fidelity_sub"] == pytest.approx(0.81)
    assert b["trace_dist_norm"] == pytest.approx(math.sqrt(0.1))
    assert sm.gentle_bounds(0.9)["trace_dist_sub"] == pytest.approx(1 / math.sqrt(3))


def test_gentle_measurement_projector():
    rho = np.diag([0.7, 0.3])
    w = sm.gentle_measurement(rho, np.diag([1.0, 0.0]))
    assert w.eps == pytest.approx(0.3)
    assert np.allclose(w.rho_prime, np.diag([0.7, 0.0]))
    assert np.allclose(w.rho_prime_normalised, np.diag([1.0, 0.0]))
    assert w.min_slack >= 0
    assert w.consistent()


def test_gentle_measurement_rejects_non_effect():
    rho = np.eye(2) / 2
    with pytest.raises(DomainError):
        sm.gentle_measurement(rho, 1.5 * np.eye(2))
    with pytest.raises(DomainError):
        sm.gentle_measurement(rho, np.zeros((2, 2)))


@given(st.integers(1, 5), st.integers(0, 2 ** 32 - 1))
def test_gentle_measurement_bounds_hold(d, seed):
    rng = np.random.default_rng(seed)
    rho = mc.sample_state("hs_mixed", d, seed)
    m = random_effect(rng, d)
    if np.trace(m @ rho).real < 1e-6:
        return
    w = sm.gentle_measurement(rho, m)
    assert w.min_slack >= -1e-9
    assert w.consistent()


def test_dr_operator_identity(rng):
    for d in (2, 3, 4):
        rho, sigma = mc.sample_state("hs_mixed", d, d), mc.sample_state("hs_mixed", d, d + 1)
        a, q = split_at(rho, sigma, 0.8)
        g = sm.dr_operator(a, q)
        assert np.allclose(g @ (a + q) @ g, a, atol=1e-9)
        w = mc.eigvalsh(g)
        assert w[0] >= -1e-12 and w[-1] <= 1 + 1e-9


def test_datta_renner_trivial_split():
    rho = mc.sample_state("hs_mixed", 3, 2)
    w = sm.datta_renner(rho, rho, np.zeros((3, 3)))
    assert np.allclose(w.rho_prime, rho, atol=1e-9)
    assert w.certified["domination_lambda"] == pytest.approx(1.0, abs=1e-8)


def test_datta_renner_rejects_bad_hypothesis():
    rho = np.diag([0.5, 0.5])
    with pytest.raises(HypothesisViolated):
        sm.datta_renner(rho, np.diag([0.1, 0.1]), np.diag([0.1, 0.0]))
    with pytest.raises(DomainError):
        sm.datta_renner(rho, np.eye(2), np.eye(2))


@given(state_pairs(), st.floats(0.3, 3.0))
def test_datta_renner_bounds_hold(pair, lam):
    rho, sigma = pair
    a, q = split_at(rho, sigma, lam)
    if np.trace(q).real >= 0.95:
        return
    w = sm.datta_renner(rho, a, q)
    assert w.min_slack >= -1e-8
    assert w.consistent(tol=1e-9)
    # dominated by lam sigma, so the smoothed Dmax is at most log2(lam)
    assert w.certified["domination_lambda"] <= 1 + 1e-6


@given(state_pairs(), st.floats(0.3, 3.0))
def test_datta_renner_witness_bounds_dtilde(pair, lam):
    """Tr Q = E_lam, so the witness shows Dmax of a nearby state is at most log2 lam."""
    rho, sigma = pair
    e = dv.hockey_stick(rho, sigma, lam)
    if not 1e-6 < e < 0.9:
        return
    a, q = split_at(rho, sigma, lam)
    w = sm.datta_renner(rho, a, q)
    assert sm.domination_factor(w.rho_prime, sigma) <= lam * (1 + 1e-6)


def test_simultaneous_smooth_product():
    r1, r2 = mc.sample_state("hs_mixed", 2, 1), mc.sample_state("hs_mixed", 2, 2)
    s1, s2 = mc.sample_state("hs_mixed", 2, 3), mc.sample_state("hs_mixed", 2, 4)
    rho = np.kron(r1, r2)
    splits = [split_at(r1, s1, 1.2), split_at(r2, s2, 1.2)]
    w = sm.simultaneous_smooth(rho, [2, 2], [a for a, _ in splits], [q for _, q in splits])
    assert w.total_eps == pytest.approx(sum(np.trace(q).real for _, q in splits))
    assert w.min_slack >= -1e-8
    assert np.trace(w.rho_prime).real == pytest.approx(1.0)


def test_simultaneous_smooth_validation():
    rho = np.eye(4) / 4
    a = [np.eye(2) / 2] * 2
    q = [0.6 * np.eye(2) / 2] * 2
    with pytest.raises(DomainError):
        sm.simultaneous_smooth(rho, [2, 2], a, q)
    with pytest.raises(DomainError):
        sm.simultaneous_smooth(rho, [2, 3], a, q)
    with pytest.raises(DimensionCap):
        sm.simultaneous_smooth(np.eye(2) / 2, [2] * 13, a, q)


@given(state_pairs())
def test_domination_factor_matches_dmax(pair):
    rho, sigma = pair
    t = sm.domination_factor(rho, sigma)
    dmax = dv.dmax(rho, sigma)
    if math.isinf(dmax):
        assert math.isinf(t)
    else:
        assert math.log2(t) == pytest.approx(dmax, abs=1e-7)


@pytest.mark.parametrize("eps", [0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6])
def test_gentle_measurement_qubit_family_is_tight(eps):
    """rho = |0><0| measured with the projector onto sqrt(1-e)|0> + sqrt(e)|1>."""
    phi = np.array([math.sqrt(1 - eps), math.sqrt(eps)])
    w = sm.gentle_measurement(np.diag([1.0, 0.0]), np.outer(phi, phi))
    c, lim = w.certified, sm.gentle_bounds(eps)
    assert w.eps == pytest.approx(eps, abs=1e-12)
    assert c["fidelity_norm"] == pytest.approx(1 - eps, abs=1e-9)
    assert c["fidelity_sub"] == pytest.approx((1 - eps) ** 2, abs=1e-9)
    assert c["trace_dist_sub"] == pytest.approx(math.sqrt(eps * (1 - 0.75 * eps)), abs=1e-9)
    assert c["gen_trace_dist_sub"] == pytest.approx(lim["gen_trace_dist_sub"], abs=1e-9)
