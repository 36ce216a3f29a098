"""Constructive smoothing witnesses.

Given an operator inequality ``rho <= A + Q`` with ``Tr Q`` small, these
routines build an explicit nearby state that is dominated by ``A``, using the
geometric-mean operator ``G = A # (A+Q)^{-1}`` as a gentle measurement.  Each
witness carries the distances it achieves, recomputed from the matrices, and
the bound each distance is promised to satisfy.
"""
import dataclasses
import math
from typing import NamedTuple

import numpy as np

from . import matcore as mc
from .config import TOL
from .errors import DimensionCap, DomainError, HypothesisViolated

# domination and ordering checks on constructed operators
ORDER_TOL = 1e-9


class Bound(NamedTuple):
    """A certified inequality ``value <= limit`` (or ``>=`` for lower bounds)."""

    value: float
    limit: float
    lower: bool

    @property
    def slack(self):
        return self.value - self.limit if self.lower else self.limit - self.value


@dataclasses.dataclass(frozen=True)
class SmoothingWitness:
    """Smoothed state together with its certified distances.

    Attributes
    ----------
    rho : numpy.ndarray
        The original state.
    rho_prime : numpy.ndarray
        Subnormalised smoothed operator.
    rho_prime_normalised : numpy.ndarray
        ``rho_prime / Tr rho_prime``.
    eps : float
        Smoothing parameter the bounds are stated for.
    certified : dict
        ``fidelity_sub``, ``fidelity_norm``, ``trace_dist_norm``,
        ``trace_dist_sub``, ``gen_trace_dist_sub`` and ``domination_lambda``
        (the least ``t`` with ``rho_prime <= t A``, NaN without an ``A``).
    bounds : dict of Bound
        Every inequality the construction promises, with its slack.
    """

    rho: np.ndarray
    rho_prime: np.ndarray
    rho_prime_normalised: np.ndarray
    eps: float
    certified: dict
    bounds: dict
    dominator: np.ndarray = None

    def recompute(self):
        """Recompute the certified fields from the stored matrices."""
        return _certify(self.rho, self.rho_prime, self.dominator)

    def consistent(self, tol=1e-10):
        fresh = self.recompute()
        return all(_close(fresh[k], v, tol) for k, v in self.certified.items())

    @property
    def min_slack(self):
        return min(b.slack for b in self.bounds.values())


def _close(a, b, tol):
    if math.isnan(a) and math.isnan(b):
        return True
    if math.isinf(a) or math.isinf(b):
        return a == b
    return abs(a - b) <= tol


def domination_factor(x, a):
    """Least ``t`` with ``x <= t a`` for PSD ``x`` and ``a`` (inf if none)."""
    v = mc.support_basis(a)
    scale = max(np.linalg.norm(x, 2), 1e-300)
    if v.shape[1] == 0:
        return 0.0 if scale <= TOL.support else math.inf
    # mass of x outside supp(a) rules out any finite t
    out = x - v @ (v.conj().T @ x @ v) @ v.conj().T
    if np.linalg.norm(out, 2) > 1e-8 * (1 + scale):
        return math.inf
    ar = v.conj().T @ a @ v
    xr = v.conj().T @ x @ v
    ih = mc.powm_psd(ar, -0.5)
    return float(max(mc.eigvalsh(mc.as_hermitian(ih @ xr @ ih))[-1], 0.0))


def _certify(rho, rho_p, a=None):
    tr = float(np.trace(rho_p).real)
    rho_n = rho_p / tr
    w_sub = mc.eigvalsh(mc.as_hermitian(rho - rho_p))
    w_norm = mc.eigvalsh(mc.as_hermitian(rho - rho_n))
    return dict(
        fidelity_sub=mc.fidelity(rho, rho_p),
        fidelity_norm=mc.fidelity(rho, rho_n),
        trace_dist_norm=0.5 * float(np.sum(np.abs(w_norm))),
        trace_dist_sub=0.5 * float(np.sum(np.abs(w_sub))),
        gen_trace_dist_sub=float(np.sum(w_sub[w_sub > 0])),
        domination_lambda=math.nan if a is None else domination_factor(rho_p, a),
    )


def gentle_bounds(eps):
    """Limits promised by the gentle measurement lemma at parameter ``eps``."""
    unnorm = math.sqrt(eps * (1 - 0.75 * eps)) if eps <= 2 / 3 else 1 / math.sqrt(3)
    return dict(
        fidelity_sub=(1 - eps) ** 2,
        fidelity_norm=1 - eps,
        trace_dist_norm=math.sqrt(eps),
        trace_dist_sub=unnorm,
        gen_trace_dist_sub=math.sqrt(eps * (1 - 0.75 * eps)) + eps / 2,
    )


def _distance_bounds(cert, eps, keys):
    lim = gentle_bounds(eps)
    return {k: Bound(cert[k], lim[k], k.startswith("fidelity")) for k in keys}


def _check_contraction(m, name):
    w = mc.eigvalsh(m)
    if w[0] < -TOL.psd or w[-1] > 1 + TOL.psd:
        raise DomainError(f"{name} must satisfy 0 <= {name} <= I "
                          f"(eigenvalues in [{w[0]:.3e}, {w[-1]:.3e}])")


def gentle_measurement(rho, m):
    """Post-measurement operator ``sqrt(M) rho sqrt(M)`` with certified bounds.

    Parameters
    ----------
    rho : array_like
        Normalised state.
    m : array_like
        Effect operator, ``0 <= M <= I``.

    Returns
    -------
    SmoothingWitness
        ``eps`` is ``1 - Tr M rho``.
    """
    rho = mc.as_state(rho, "rho")
    m = mc.as_hermitian(m)
    if m.shape != rho.shape:
        raise DomainError("rho and M have different dimensions")
    _check_contraction(m, "M")
    eps = min(max(1.0 - float(np.trace(m @ rho).real), 0.0), 1.0)
    if eps >= 1.0:
        raise DomainError("Tr M rho = 0; the post-measurement state is undefined")
    s = mc.sqrtm_psd(m)
    rho_p = mc.as_hermitian(s @ rho @ s)
    cert = _certify(rho, rho_p)
    bounds = _distance_bounds(cert, eps, gentle_bounds(eps).keys())
    return SmoothingWitness(rho, rho_p, rho_p / np.trace(rho_p).real, eps, cert, bounds)


def _hypothesis(rho, a, q, label=""):
    """Raise unless rho <= A + Q within the relative tolerance."""
    aq = mc.as_hermitian(a + q)
    lmin = float(mc.eigvalsh(aq - rho)[0])
    if lmin < -1e-8 * (1 + np.linalg.norm(aq, 2)):
        raise HypothesisViolated(f"rho <= A + Q fails{label}: smallest eigenvalue {lmin:.3e}",
                                 lmin)
    return aq


def dr_operator(a, q):
    """Geometric mean ``A # (A+Q)^{-1}`` computed on the support of ``A + Q``.

    Returns a PSD contraction ``G`` with ``G (A+Q) G = A`` on that support.
    """
    aq = mc.as_hermitian(a + q)
    v = mc.support_basis(aq)
    if v.shape[1] == 0:
        return np.zeros_like(aq)
    b = v.conj().T @ aq @ v
    ar = v.conj().T @ a @ v
    bh = mc.sqrtm_psd(b)
    bih = mc.powm_psd(b, -0.5)
    g = bih @ mc.sqrtm_psd(mc.as_hermitian(bh @ ar @ bh)) @ bih
    return v @ mc.as_hermitian(g) @ v.conj().T


def datta_renner(rho, a, q, eps=None):
    """Smoothed state dominated by ``A`` from ``rho <= A + Q``.

    Parameters
    ----------
    rho : array_like
        Normalised state.
    a, q : array_like
        PSD operators with ``rho <= A + Q``.
    eps : float, optional
        Bound on ``Tr Q``; defaults to ``Tr Q``.  Must be below one.

    Returns
    -------
    SmoothingWitness
        ``rho_prime = G rho G`` with ``G = A # (A+Q)^{-1}``.  ``bounds`` holds
        the four distance bounds, the two domination conditions (as
        ``domination`` and ``domination_norm``, smallest eigenvalues of
        ``A - rho'`` and ``A/(1-eps) - rho'/Tr rho'``), ``0 <= G <= I`` and
        ``1 - Tr rho G^2 <= Tr Q``.

    Raises
    ------
    HypothesisViolated
        If ``rho <= A + Q`` fails beyond tolerance.
    """
    rho = mc.as_state(rho, "rho")
    a = mc.as_hermitian(a)
    q = mc.as_hermitian(q)
    for name, x in (("A", a), ("Q", q)):
        if x.shape != rho.shape:
            raise DomainError(f"{name} has the wrong dimension")
        if mc.eigvalsh(x)[0] < -TOL.psd * (1 + np.linalg.norm(x, 2)):
            raise DomainError(f"{name} is not PSD")
    tq = float(np.trace(q).real)
    eps = tq if eps is None else float(eps)
    if tq > eps + TOL.trace or not 0 <= eps < 1:
        raise DomainError(f"need Tr Q <= eps < 1 (Tr Q = {tq:.6g}, eps = {eps:.6g})")
    _hypothesis(rho, a, q)
    g = dr_operator(a, q)
    rho_p = mc.as_hermitian(g @ rho @ g)
    tr = float(np.trace(rho_p).real)
    rho_n = rho_p / tr
    cert = _certify(rho, rho_p, a)
    bounds = _distance_bounds(cert, eps, ("fidelity_sub", "fidelity_norm",
                                          "trace_dist_norm", "gen_trace_dist_sub"))
    wg = mc.eigvalsh(g)
    bounds.update(
        domination=Bound(float(mc.eigvalsh(a - rho_p)[0]), -ORDER_TOL, True),
        domination_norm=Bound(float(mc.eigvalsh(a / (1 - eps) - rho_n)[0]), -ORDER_TOL, True),
        contraction_lower=Bound(float(wg[0]), -ORDER_TOL, True),
        contraction_upper=Bound(float(wg[-1]), 1 + ORDER_TOL, False),
        trace_loss=Bound(1 - float(np.trace(rho @ g @ g).real), tq + ORDER_TOL, False),
    )
    return SmoothingWitness(rho, rho_p, rho_n, eps, cert, bounds, a)


class SimultaneousWitness(NamedTuple):
    """Result of smoothing all marginals of a global state at once."""

    rho_prime: np.ndarray
    total_eps: float
    fidelity: float
    trace_dist: float
    marginals: list
    bounds: dict

    @property
    def min_slack(self):
        return min(b.slack for b in self.bounds.values())


def simultaneous_smooth(rho, dims, a_list, q_list, eps_list=None):
    """Smooth every marginal of ``rho`` with one product of gentle measurements.

    Parameters
    ----------
    rho : array_like
        State on the tensor product of spaces with dimensions ``dims``.
    dims : sequence of int
    a_list, q_list : sequence of array_like
        Per-factor operators with ``rho_i <= A_i + Q_i``.
    eps_list : sequence of float, optional
        Bounds on ``Tr Q_i`` (default ``Tr Q_i``); their sum must be below one.

    Returns
    -------
    SimultaneousWitness
        ``rho_prime = G rho G / Tr(G rho G)`` with ``G`` the tensor product of
        ``A_i # (A_i+Q_i)^{-1}``.  ``bounds`` holds the fidelity and trace
        distance bounds and, per factor ``i``, ``marginal_i``: the smallest
        eigenvalue of ``A_i/(1 - sum eps) - rho'_i``.
    """
    dims = [int(d) for d in dims]
    m = len(dims)
    if int(np.prod(dims)) > mc.MAX_DIM:
        raise DimensionCap(f"total dimension {int(np.prod(dims))} exceeds {mc.MAX_DIM}")
    rho = mc.as_state(rho, "rho")
    if rho.shape[0] != int(np.prod(dims)):
        raise DomainError("dims do not match rho")
    if len(a_list) != m or len(q_list) != m:
        raise DomainError("need one (A, Q) pair per factor")
    qs = [mc.as_hermitian(q) for q in q_list]
    if eps_list is None:
        eps_list = [float(np.trace(q).real) for q in qs]
    eps_list = [float(e) for e in eps_list]
    total = sum(eps_list)
    if total >= 1 or min(eps_list) < 0:
        raise DomainError(f"need eps_i >= 0 and sum eps_i < 1 (sum = {total:.6g})")
    g = np.ones((1, 1), dtype=complex)
    for i, (a, q) in enumerate(zip(a_list, qs)):
        a = mc.as_hermitian(a)
        rho_i = mc.partial_trace(rho, dims, i)
        _hypothesis(rho_i, a, q, f" on factor {i}")
        g = np.kron(g, dr_operator(a, q))
    rho_p = mc.as_hermitian(g @ rho @ g)
    rho_p = rho_p / np.trace(rho_p).real
    f = mc.fidelity(rho, rho_p)
    w = mc.eigvalsh(mc.as_hermitian(rho - rho_p))
    td = 0.5 * float(np.sum(np.abs(w)))
    bounds = dict(fidelity=Bound(f, 1 - total, True),
                  trace_dist=Bound(td, math.sqrt(total), False))
    marginals = []
    for i, a in enumerate(a_list):
        r_i = mc.partial_trace(rho_p, dims, i)
        marginals.append(r_i)
        lmin = float(mc.eigvalsh(mc.as_hermitian(a) / (1 - total) - r_i)[0])
        bounds[f"marginal_{i}"] = Bound(lmin, -ORDER_TOL, True)
    return SimultaneousWitness(rho_p, total, f, td, marginals, bounds)
