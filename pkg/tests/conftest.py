import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from smoothdiv import matcore as mc

settings.register_profile(
    "default", max_examples=40, deadline=None, derandomize=True,
    suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

KINDS = ("haar_pure", "hs_mixed", "classical_dirichlet")


@st.composite
def state_pairs(draw, dims=(2, 3, 4), kinds=KINDS):
    """(rho, sigma) drawn from the library's own ensembles by seed."""
    d = draw(st.sampled_from(dims))
    k1 = draw(st.sampled_from(kinds))
    k2 = draw(st.sampled_from(kinds if k1 != "classical_dirichlet" else ("classical_dirichlet",)))
    s1 = draw(st.integers(0, 2 ** 32 - 1))
    s2 = draw(st.integers(0, 2 ** 32 - 1))
    return mc.sample_state(k1, d, s1), mc.sample_state(k2, d, s2)


@st.composite
def full_support_pairs(draw, dims=(2, 3)):
    d = draw(st.sampled_from(dims))
    s1 = draw(st.integers(0, 2 ** 32 - 1))
    s2 = draw(st.integers(0, 2 ** 32 - 1))
    return mc.sample_state("hs_mixed", d, s1), mc.sample_state("hs_mixed", d, s2)


eps_values = st.floats(0.02, 0.98)


def pure_pair(f):
    """Pure qubit states with overlap |<psi|phi>|^2 = f."""
    psi = mc.pure_state([1.0, 0.0])
    phi = mc.pure_state([math.sqrt(f), math.sqrt(1.0 - f)])
    return psi, phi


@pytest.fixture
def classical_pair():
    return np.diag([0.75, 0.25]).astype(complex), np.diag([0.5, 0.5]).astype(complex)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
