import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from smoothdiv import divergences as dv
from smoothdiv import matcore as mc
from smoothdiv.errors import DomainError

from conftest import eps_values, full_support_pairs, pure_pair, state_pairs

LOG2_15 = math.log2(1.5)


def oracle_dtilde(rho, sigma, eps, iters=200):
    """Plain bisection on lambda using numpy eigenvalues only."""
    e = lambda lam: float(np.sum(np.clip(np.linalg.eigvalsh(rho - lam * sigma), 0, None)))
    lo, hi = 0.0, 1.0
    while e(hi) > eps:
        hi *= 2
        if hi > 2 ** 60:
            return math.inf
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        lo, hi = (mid, hi) if e(mid) > eps else (lo, mid)
    return math.log2(hi)


def oracle_dh_classical(p, q, eps):
    """Exact Neyman-Pearson test for distributions (sorted greedy fill)."""
    order = sorted(range(len(p)), key=lambda i: -(p[i] / q[i] if q[i] > 0 else math.inf))
    need, cost = 1.0 - eps, 0.0
    for i in order:
        if need <= 0:
            break
        take = min(1.0, need / p[i]) if p[i] > 0 else 0.0
        need -= take * p[i]
        cost += take * q[i]
    return math.inf if cost <= 0 else -math.log2(cost)


# ---------------------------------------------------------------------------
# frozen examples

def test_umegaki_examples(classical_pair):
    p, q = classical_pair
    assert dv.umegaki(p, p) == pytest.approx(0, abs=1e-12)
    assert dv.umegaki(p, q) == pytest.approx(0.75 * LOG2_15 - 0.25, abs=1e-12)
    assert dv.umegaki(np.diag([1.0, 0]), np.diag([0, 1.0])) == math.inf


def test_dmax_examples(classical_pair):
    p, q = classical_pair
    assert dv.dmax(p, p) == pytest.approx(0, abs=1e-12)
    assert dv.dmax(p, q) == pytest.approx(LOG2_15, abs=1e-12)
    assert dv.dmax(np.diag([1.0, 0]), np.eye(2) / 2) == pytest.approx(1.0, abs=1e-12)


def test_hockey_stick_examples():
    rho = mc.sample_state("hs_mixed", 3, 2)
    assert dv.hockey_stick(rho, rho, 1.0) == pytest.approx(0, abs=1e-12)
    for lam in (0.0, 0.3, 0.9, 1.7):
        assert dv.hockey_stick(rho, rho, lam) == pytest.approx(max(1 - lam, 0), abs=1e-12)
    psi, phi = pure_pair(0.9)
    assert dv.hockey_stick(psi, phi, 1.0) == pytest.approx(math.sqrt(0.1), abs=1e-12)
    assert dv.hockey_stick(psi, phi, 0.0) == pytest.approx(1.0, abs=1e-12)


def test_dtilde_examples():
    rho = mc.sample_state("hs_mixed", 3, 4)
    assert dv.dtilde_max(rho, rho, 0.5) == pytest.approx(-1.0, abs=1e-10)
    psi, phi = pure_pair(0.9)
    assert dv.dtilde_max(psi, phi, 0.2) == pytest.approx(math.log2(1.6), abs=1e-9)
    assert dv.dtilde_max(psi, phi, 0.05) == math.inf
    assert dv.dtilde_max(psi, phi, 1.0) == -math.inf
    with pytest.raises(DomainError):
        dv.dtilde_max(psi, phi, 1.5)


def test_dtilde_dual_examples():
    rho = mc.sample_state("hs_mixed", 2, 4)
    assert dv.dtilde_max_dual(rho, rho, 0.5) == pytest.approx(-1.0, abs=1e-8)
    psi, phi = pure_pair(0.9)
    assert dv.dtilde_max_dual(psi, phi, 0.2) == pytest.approx(math.log2(1.6), abs=1e-8)


def test_dh_examples():
    rho = mc.sample_state("hs_mixed", 3, 8)
    for e in (0.1, 0.5, 0.8):
        assert dv.dh(rho, rho, e) == pytest.approx(-math.log2(1 - e), abs=1e-10)
    psi, phi = pure_pair(0.9)
    assert dv.dh(psi, phi, 0.1) == pytest.approx(-math.log2(0.64), abs=1e-9)
    e, mu = 0.3, 0.1
    p, q = np.diag([e, 1 - e]), np.diag([mu, 1 - mu])
    assert dv.dh(p, q, 1 - e) >= -math.log2(mu) - 1e-12


def test_dh_test_certificate():
    rho, sigma = mc.sample_state("hs_mixed", 3, 1), mc.sample_state("hs_mixed", 3, 2)
    t = dv.dh_test(rho, sigma, 0.2)
    m = t.test
    w = mc.eigvalsh(m)
    assert w[0] >= -1e-12 and w[-1] <= 1 + 1e-12
    assert np.trace(m @ rho).real >= 0.8 - 1e-12
    assert t.value == pytest.approx(-math.log2(np.trace(m @ sigma).real), abs=1e-12)
    assert 0 <= t.dual_gap <= 1e-12


def test_dspec_examples(classical_pair):
    p, q = classical_pair
    # mass below the threshold jumps from 0 to 1/4 at gamma = 1/2
    assert dv.dspec(p, q, 0.2) == pytest.approx(-1.0, abs=1e-10)
    assert dv.dspec(p, q, 0.3) == pytest.approx(LOG2_15, abs=1e-10)
    rho = mc.sample_state("hs_mixed", 2, 3)
    assert dv.dspec(rho, rho, 0.4) == pytest.approx(0.0, abs=1e-9)


def test_renyi_examples(classical_pair):
    p, q = classical_pair
    for fam in ("petz", "sandwiched"):
        assert dv.renyi(p, q, 2.0, fam) == pytest.approx(math.log2(1.25), abs=1e-12)
        assert dv.renyi(p, p, 0.5, fam) == pytest.approx(0, abs=1e-12)
    with pytest.raises(DomainError):
        dv.renyi(p, q, 1.0)
    assert dv.renyi(np.diag([1.0, 0]), np.diag([0, 1.0]), 0.5) == math.inf
    assert dv.renyi(np.eye(2) / 2, np.diag([1.0, 0]), 2.0) == math.inf


def test_sandwiched_large_alpha_approaches_dmax():
    for seed in range(10):
        rho = mc.sample_state("hs_mixed", 2, seed)
        sigma = mc.sample_state("hs_mixed", 2, seed + 100)
        gaps = [dv.dmax(rho, sigma) - dv.renyi(rho, sigma, a, "sandwiched") for a in (8.0, 24.0, 64.0)]
        assert np.all(np.diff(gaps) <= 1e-12) and gaps[0] >= -1e-9
        assert gaps[-1] <= 0.05


def test_binary_fidelity():
    assert dv.binary_fidelity(0.3, 0.3) == pytest.approx(1.0)
    assert dv.binary_fidelity(0.1, 0.9) == pytest.approx(0.36)
    assert dv.binary_fidelity(0.0, 1.0) == 0.0


def test_pure_closed_forms():
    dt, h = dv.pure_closed_forms(0.9, 0.2)
    assert dt == pytest.approx(math.log2(1.6), abs=1e-12)
    assert dv.pure_closed_forms(0.9, 0.1)[1] == pytest.approx(-math.log2(0.64), abs=1e-12)
    dt, h = dv.pure_closed_forms(1.0, 0.3)
    assert dt == pytest.approx(math.log2(0.7))
    assert h == pytest.approx(math.log2(1 / 0.7))
    assert dv.pure_closed_forms(0.9, 0.05)[0] == math.inf


def test_dobs_examples(classical_pair):
    p, q = classical_pair
    rho = mc.sample_state("hs_mixed", 2, 5)
    assert dv.dobs(rho, rho) == pytest.approx(0, abs=1e-9)
    assert dv.dobs(np.diag([1.0, 0]), np.diag([0, 1.0])) == math.inf
    assert dv.dobs(p, q) >= 0.75 * LOG2_15 - 1e-12


def test_dobs_beats_random_tests(rng):
    rho, sigma = mc.sample_state("hs_mixed", 2, 11), mc.sample_state("hs_mixed", 2, 12)
    val = dv.dobs(rho, sigma)
    for _ in range(2000):
        g = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        h = g @ g.conj().T
        m = h / mc.eigvalsh(h)[-1]
        a, b = np.trace(m @ rho).real, np.trace(m @ sigma).real
        assert a * math.log2(a / b) <= val + 1e-9


def test_hilbert_metric(classical_pair):
    p, q = classical_pair
    assert dv.hilbert_metric(p, p) == pytest.approx(0, abs=1e-12)
    assert dv.hilbert_metric(p, q) == pytest.approx(math.log2(3), abs=1e-12)
    assert dv.hilbert_metric(np.eye(2) / 2, np.diag([1.0, 0])) == math.inf


# ---------------------------------------------------------------------------
# oracles on random inputs

def test_pure_states_match_closed_forms():
    rng = np.random.default_rng(3)
    for _ in range(100):
        psi = mc.sample_state("haar_pure", 2, int(rng.integers(2 ** 32)))
        phi = mc.sample_state("haar_pure", 2, int(rng.integers(2 ** 32)))
        f = mc.distances(psi, phi).fidelity
        for e in (0.05, 0.3, 0.7, 0.95):
            dt, h = dv.pure_closed_forms(f, e)
            got_dt, got_h = dv.dtilde_max(psi, phi, e), dv.dh(psi, phi, e)
            assert (got_dt == dt) if math.isinf(dt) else got_dt == pytest.approx(dt, abs=1e-8)
            assert (got_h == h) if math.isinf(h) else got_h == pytest.approx(h, abs=1e-8)


@given(state_pairs(), eps_values)
def test_dtilde_matches_bisection_oracle(pair, eps):
    rho, sigma = pair
    got, want = dv.dtilde_max(rho, sigma, eps), oracle_dtilde(rho, sigma, eps)
    if math.isinf(want) or math.isinf(got):
        # the oracle cannot tell a support obstruction from a huge lambda
        assert got >= 59 or math.isinf(got) and want >= 30
    else:
        assert got == pytest.approx(want, abs=1e-9)


@given(st.integers(2, 6), st.integers(0, 2 ** 32 - 1), eps_values)
def test_dh_matches_classical_np_oracle(d, seed, eps):
    rng = np.random.default_rng(seed)
    p, q = rng.dirichlet(np.ones(d)), rng.dirichlet(np.ones(d))
    got = dv.dh(np.diag(p), np.diag(q), eps)
    assert got == pytest.approx(oracle_dh_classical(p, q, eps), abs=1e-9)


@given(state_pairs(), eps_values)
def test_dual_route_agrees(pair, eps):
    rho, sigma = pair
    a, b = dv.dtilde_max(rho, sigma, eps), dv.dtilde_max_dual(rho, sigma, eps)
    if math.isinf(a):
        assert math.isinf(b)
    else:
        assert a == pytest.approx(b, abs=1e-8)


# ---------------------------------------------------------------------------
# invariants

@given(state_pairs())
def test_hockey_stick_monotone_convex(pair):
    rho, sigma = pair
    lams = np.linspace(0, 4, 50)
    vals = np.array([dv.hockey_stick(rho, sigma, x) for x in lams])
    assert np.all(np.diff(vals) <= 1e-12)
    assert np.all(vals[1:-1] <= 0.5 * (vals[:-2] + vals[2:]) + 1e-12)
    leak = 1 - np.trace(mc.support_projector(sigma) @ rho).real
    assert dv.hockey_stick(rho, sigma, 1e9) == pytest.approx(leak, abs=1e-6)


@given(state_pairs())
def test_dtilde_at_zero_is_dmax(pair):
    rho, sigma = pair
    a, b = dv.dtilde_max(rho, sigma, 0.0), dv.dmax(rho, sigma)
    assert a == b if math.isinf(b) else a == pytest.approx(b, abs=1e-8)


@given(state_pairs(), st.floats(0.0, 0.97))
def test_dtilde_monotone_right_continuous(pair, eps):
    rho, sigma = pair
    a, b = dv.dtilde_max(rho, sigma, eps), dv.dtilde_max(rho, sigma, eps + 1e-6)
    assert b <= a
    if math.isfinite(a):
        assert a <= b + 1e-3


@given(state_pairs(), eps_values, eps_values)
def test_dh_monotone_and_trivial_bound(pair, e1, e2):
    rho, sigma = pair
    lo, hi = sorted((e1, e2))
    assert dv.dh(rho, sigma, lo) <= dv.dh(rho, sigma, hi) + 1e-12
    assert dv.dh(rho, sigma, lo) + math.log2(1 - lo) >= -1e-9


@given(full_support_pairs())
def test_renyi_monotone_in_alpha(pair):
    rho, sigma = pair
    alphas = [0.1, 0.3, 0.5, 0.7, 0.9, 1.2, 1.5, 2.0, 3.0, 5.0]
    for fam in ("petz", "sandwiched"):
        vals = [dv.renyi(rho, sigma, a, fam) for a in alphas]
        assert np.all(np.diff(vals) >= -1e-8)


@given(state_pairs(), eps_values, st.integers(0, 2 ** 32 - 1))
def test_data_processing_two_outcome(pair, eps, seed):
    rho, sigma = pair
    d = rho.shape[0]
    rng = np.random.default_rng(seed)
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    h = g @ g.conj().T
    m = h / (mc.eigvalsh(h)[-1] * 1.0001)
    a, b = np.trace(m @ rho).real, np.trace(m @ sigma).real
    p, q = np.diag([a, 1 - a]), np.diag([b, 1 - b])
    assert dv.dtilde_max(p, q, eps) <= dv.dtilde_max(rho, sigma, eps) + 1e-8


def test_pencil_masses_sum_to_one():
    rho, sigma = mc.sample_state("hs_mixed", 3, 1), mc.sample_state("haar_pure", 3, 2)
    pen = dv.pencil(rho, sigma)
    assert float(np.sum(pen.mass_rho)) + pen.free_mass == pytest.approx(1.0, abs=1e-9)
    assert np.all(np.diff(pen.gamma_breakpoints) >= 0)
