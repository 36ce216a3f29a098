"""Spectral evaluators for divergences between quantum states.

Every function returns a value in bits as a Python float, with ``math.inf``
standing for an infinite divergence.  Support decisions go through
:func:`smoothdiv.matcore.support_basis` so the same cutoff is used everywhere.
"""
import dataclasses
import math
from typing import NamedTuple

import mpmath
import numpy as np
import scipy.linalg
from scipy import optimize

from . import matcore as mc
from .config import TOL
from .errors import DomainError

LN2 = math.log(2.0)
LOG2E = 1.0 / LN2
LAMBDA_CAP = 2.0 ** 40
# absolute tolerance for comparing epsilon with the leaked mass
EPS_TOL = 1e-12

METRICS = ("trace", "purified")
NORMALISATIONS = ("normalised", "subnormalised")


@dataclasses.dataclass(frozen=True)
class SmoothingSpec:
    """Selects one of the four smoothing balls.

    Parameters
    ----------
    metric : {'trace', 'purified'}
    normalisation : {'normalised', 'subnormalised'}
    epsilon : float
        Radius in [0, 1].
    """

    metric: str
    normalisation: str
    epsilon: float

    def __post_init__(self):
        if self.metric not in METRICS:
            raise DomainError(f"metric must be one of {METRICS}")
        if self.normalisation not in NORMALISATIONS:
            raise DomainError(f"normalisation must be one of {NORMALISATIONS}")
        if not 0.0 <= self.epsilon <= 1.0:
            raise DomainError("epsilon must lie in [0, 1]")


class PencilDecomposition(NamedTuple):
    """Generalized eigen-data of rho against sigma on the support of sigma.

    ``gamma_breakpoints`` are the distinct generalized eigenvalues in
    increasing order.  For the eigenprojector :math:`P_k` of
    :math:`\\sigma^{-1/2}\\rho\\sigma^{-1/2}`, ``mass_sigma[k]`` is
    :math:`\\mathrm{Tr}\\,\\sigma^{1/2}P_k\\sigma^{1/2}` and ``mass_rho[k]``
    is ``gamma * mass_sigma``.  ``free_mass`` is the weight of rho outside the
    support of sigma.  For commuting inputs these are the atoms of the
    likelihood-ratio distribution.
    """

    gamma_breakpoints: np.ndarray
    mass_rho: np.ndarray
    mass_sigma: np.ndarray
    free_mass: float


class _Split(NamedTuple):
    basis: np.ndarray      # columns spanning supp sigma
    leak: float            # Tr rho (I - Pi_sigma)
    commuting: bool        # [rho, Pi_sigma] = 0
    rho_s: np.ndarray      # rho compressed to supp sigma
    sigma_s: np.ndarray


def _states(rho, sigma):
    return mc.as_state(rho, "rho"), mc.as_state(sigma, "sigma")


def _split(rho, sigma):
    v = mc.support_basis(sigma)
    d = rho.shape[0]
    rho_s = v.conj().T @ rho @ v
    sigma_s = v.conj().T @ sigma @ v
    leak = max(1.0 - float(np.trace(rho_s).real), 0.0)
    if v.shape[1] == d:
        return _Split(v, 0.0, True, rho_s, sigma_s)
    proj = v @ v.conj().T
    comm = mc.commutes(rho, proj)
    return _Split(v, leak, comm, rho_s, sigma_s)


def _log2(x):
    if x <= 0:
        return -math.inf
    if math.isinf(x):
        return math.inf
    return math.log(x) / LN2


def _whiten(rho_s, sigma_s):
    """sigma^{-1/2} rho sigma^{-1/2} on the support of sigma."""
    w, u = np.linalg.eigh(sigma_s)
    s = (u / np.sqrt(w)) @ u.conj().T
    return mc.as_hermitian(s @ rho_s @ s), s


def _lambda_max_pencil(rho_s, sigma_s):
    if rho_s.shape[0] == 0:
        return 0.0
    k, _ = _whiten(rho_s, sigma_s)
    return max(float(mc.eigvalsh(k)[-1]), 0.0)


def pencil(rho, sigma):
    """Generalized eigen-decomposition of rho against sigma.

    Parameters
    ----------
    rho, sigma : array_like
        Density matrices.

    Returns
    -------
    PencilDecomposition
    """
    rho, sigma = _states(rho, sigma)
    sp = _split(rho, sigma)
    k, _ = _whiten(sp.rho_s, sp.sigma_s)
    w, u = np.linalg.eigh(k)
    sh = mc.sqrtm_psd(sp.sigma_s)
    gam, mr, ms = [], [], []
    i = 0
    while i < len(w):
        j = i
        while j + 1 < len(w) and abs(w[j + 1] - w[i]) <= 1e-12 * max(1.0, abs(w[i])):
            j += 1
        blk = u[:, i:j + 1]
        m_sig = float(np.real(np.trace(sh @ blk @ blk.conj().T @ sh)))
        g = float(np.mean(w[i:j + 1]))
        gam.append(g)
        ms.append(m_sig)
        mr.append(g * m_sig)
        i = j + 1
    return PencilDecomposition(np.array(gam), np.array(mr), np.array(ms), sp.leak)


def umegaki(rho, sigma):
    r"""Umegaki relative entropy :math:`\mathrm{Tr}\,\rho(\log\rho-\log\sigma)`.

    Returns ``inf`` when the support of rho is not contained in that of sigma.
    """
    rho, sigma = _states(rho, sigma)
    sp = _split(rho, sigma)
    if sp.leak > TOL.support:
        return math.inf
    w = mc.eigvalsh(rho)
    w = w[w > TOL.support * w[-1]]
    neg_ent = float(np.sum(w * np.log(w)))
    cross = float(np.real(np.trace(rho @ mc.logm_psd(sigma))))
    return (neg_ent - cross) / LN2


def dmax(rho, sigma):
    """Max-relative entropy, the log of the least lambda with rho <= lambda sigma."""
    rho, sigma = _states(rho, sigma)
    return _dmax(rho, sigma)


def _dmax(rho, sigma):
    sp = _split(rho, sigma)
    if sp.leak > TOL.support:
        return math.inf
    return _log2(_lambda_max_pencil(sp.rho_s, sp.sigma_s))


def hockey_stick(rho, sigma, lam):
    r"""Hockey-stick divergence :math:`E_\lambda = \mathrm{Tr}(\rho-\lambda\sigma)_+`."""
    if lam < 0:
        raise DomainError("lambda must be non-negative")
    rho, sigma = _states(rho, sigma)
    return _hockey(rho, sigma, lam)


def _hockey(rho, sigma, lam):
    w = mc.eigvalsh(rho - lam * sigma)
    return float(np.sum(w[w > 0]))


class _HockeyCurve:
    """Evaluates lambda -> E_lambda, splitting off the leaked mass when exact."""

    def __init__(self, rho, sigma):
        self.rho, self.sigma = rho, sigma
        self.sp = _split(rho, sigma)

    def __call__(self, lam):
        sp = self.sp
        if sp.commuting:
            if sp.rho_s.shape[0] == 0:
                return sp.leak
            w = mc.eigvalsh(sp.rho_s - lam * sp.sigma_s)
            return sp.leak + float(np.sum(w[w > 0]))
        return _hockey(self.rho, self.sigma, lam)


def _dtilde_lambda(rho, sigma, eps):
    """Return (lambda, curve) with lambda = inf{l : E_l <= eps} (inf if none)."""
    curve = _HockeyCurve(rho, sigma)
    sp = curve.sp
    if eps >= 1.0:
        return 0.0, curve
    lam_top = _lambda_max_pencil(sp.rho_s, sp.sigma_s)
    if eps == 0.0:
        return (math.inf if sp.leak > TOL.support else lam_top), curve
    if eps < sp.leak - EPS_TOL:
        return math.inf, curve
    if sp.commuting:
        if eps <= sp.leak + EPS_TOL:
            # flat tail of the hockey stick sits exactly at level eps
            return lam_top, curve
        hi = lam_top
    else:
        hi = 1.0
        while curve(hi) > eps:
            hi *= 2.0
            if hi > LAMBDA_CAP:
                return math.inf, curve
    lo = 1.0 - eps      # E_l >= 1 - l
    # E_lo = eps exactly when lo is below every likelihood ratio; allow rounding
    if lo >= hi or curve(lo) <= eps + 8 * np.finfo(float).eps:
        return min(lo, hi), curve
    f = lambda x: curve(2.0 ** x) - eps
    x = optimize.brentq(f, math.log2(lo), math.log2(hi), xtol=1e-14,
                        rtol=max(TOL.lambda_rtol * 1e-3, 4 * np.finfo(float).eps),
                        maxiter=200)
    return 2.0 ** x, curve


def dtilde_max(rho, sigma, eps):
    r"""Log of the least lambda with :math:`\mathrm{Tr}(\rho-\lambda\sigma)_+\le\varepsilon`.

    Parameters
    ----------
    rho, sigma : array_like
        Density matrices.
    eps : float
        Smoothing parameter in [0, 1].

    Returns
    -------
    float
        Value in bits.  ``inf`` when eps is below the mass of rho outside the
        support of sigma, and also at equality when rho does not commute with
        that support projector.  ``-inf`` at eps = 1.

    Notes
    -----
    The hockey-stick curve is continuous and strictly decreasing until it
    reaches its limit, so the root is bracketed between ``1 - eps`` and
    ``2**dmax`` (or a geometrically grown bound) and located with Brent's
    method in log-space.
    """
    if not 0.0 <= eps <= 1.0:
        raise DomainError("eps must lie in [0, 1]")
    rho, sigma = _states(rho, sigma)
    lam, _ = _dtilde_lambda(rho, sigma, float(eps))
    return _log2(lam)


def dtilde_max_witness(rho, sigma, eps):
    """Optimal pair (lambda, Q) with rho <= lambda sigma + Q and Tr Q <= eps.

    ``Q`` is the positive part of ``rho - lambda sigma``.  Returns
    ``(inf, None)`` when no finite lambda exists.
    """
    rho, sigma = _states(rho, sigma)
    lam, _ = _dtilde_lambda(rho, sigma, float(eps))
    if math.isinf(lam):
        return lam, None
    w, v = np.linalg.eigh(rho - lam * sigma)
    q = (v * np.clip(w, 0, None)) @ v.conj().T
    return lam, mc.as_hermitian(q)


def dtilde_max_dual(rho, sigma, eps, return_iterations=False):
    r"""Dual form :math:`\log\sup_{0\le W\le I}(\mathrm{Tr}W\rho-\varepsilon)/\mathrm{Tr}W\sigma`.

    Solved by Dinkelbach's fractional-programming iteration: at the current
    ratio ``t`` the best test is the positive projector of ``rho - t sigma``,
    whose ratio becomes the next ``t``.  Every iterate is an achieved ratio,
    so the sequence increases to the supremum from below.

    Parameters
    ----------
    rho, sigma : array_like
    eps : float
        In (0, 1).
    return_iterations : bool
        Also return the number of iterations used.
    """
    if not 0.0 < eps < 1.0:
        raise DomainError("eps must lie in (0, 1)")
    rho, sigma = _states(rho, sigma)
    sp = _split(rho, sigma)
    done = lambda val, it=0: (val, it) if return_iterations else val
    if eps < sp.leak - EPS_TOL:
        return done(math.inf)
    if eps <= sp.leak + EPS_TOL:
        if not sp.commuting:
            return done(math.inf)
        return done(_log2(_lambda_max_pencil(sp.rho_s, sp.sigma_s)))
    t = 1.0 - eps
    for it in range(1, 201):
        w, v = np.linalg.eigh(rho - t * sigma)
        pos = v[:, w > 0]
        a = float(np.real(np.einsum("ij,ik,kj->", pos.conj(), rho, pos)))
        b = float(np.real(np.einsum("ij,ik,kj->", pos.conj(), sigma, pos)))
        gap = a - t * b - eps
        if gap <= 1e-15 * max(1.0, t) or b <= 0:
            break
        t_new = (a - eps) / b
        if t_new <= t * (1 + 1e-16):
            break
        t = t_new
        if t > LAMBDA_CAP:
            return done(math.inf, it)
    return done(_log2(t), it)


class HypothesisTest(NamedTuple):
    """Optimal test of the hypothesis-testing divergence.

    ``value`` is in bits, ``test`` the operator M, ``type1`` equals
    Tr M rho and ``type2`` equals Tr M sigma; ``dual_gap`` is the difference
    between the achieved type-II error and the Lagrange-dual lower bound.
    """

    value: float
    test: np.ndarray
    type1: float
    type2: float
    dual_gap: float


def _np_side(rho, sigma, gamma):
    """Eigenvectors spanning {gamma rho > sigma} and their rho, sigma weights."""
    w, v = np.linalg.eigh(gamma * rho - sigma)
    pos = v[:, w > 0]
    a = float(np.real(np.vdot(pos, rho @ pos)))
    b = float(np.real(np.vdot(pos, sigma @ pos)))
    return pos, a, b


def dh_test(rho, sigma, eps):
    r"""Hypothesis-testing divergence together with its optimal test.

    Minimizes :math:`\mathrm{Tr}M\sigma` subject to
    :math:`\mathrm{Tr}M\rho\ge1-\varepsilon`, :math:`0\le M\le I`.

    Notes
    -----
    The Lagrange dual is the concave one-dimensional problem
    :math:`\beta=\sup_{\gamma\ge0}\gamma(1-\varepsilon)-\mathrm{Tr}(\gamma\rho-\sigma)_+`.
    Its maximizer is bracketed on the sign of the derivative
    :math:`(1-\varepsilon)-\mathrm{Tr}\,\rho\{\gamma\rho>\sigma\}`, using
    Illinois steps with a bisection fallback since the derivative may jump.
    The test is the convex combination of the Neyman-Pearson projectors at
    the two bracket ends that meets the type-I constraint with equality; at
    a degenerate threshold this is exactly a fractional weight on the merged
    boundary eigenspace.  Iteration stops once the primal value is within
    ``1e-13`` (relative) of the dual bound.
    """
    if not 0.0 <= eps <= 1.0:
        raise DomainError("eps must lie in [0, 1]")
    rho, sigma = _states(rho, sigma)
    d = rho.shape[0]
    sp = _split(rho, sigma)
    target = 1.0 - eps
    if sp.leak >= target - EPS_TOL:
        v = sp.basis
        m = np.eye(d) - v @ v.conj().T
        return HypothesisTest(math.inf, m, sp.leak, 0.0, 0.0)
    if eps == 0.0:
        m = mc.support_projector(rho)
        b = float(np.real(np.trace(m @ sigma)))
        return HypothesisTest(-_log2(b), m, 1.0, b, 0.0)
    lo, hi = 0.0, 1.0
    lo_side = (np.zeros((d, 0), complex), 0.0, 0.0)
    while True:
        hi_side = _np_side(rho, sigma, hi)
        if hi_side[1] >= target:
            break
        lo, lo_side = hi, hi_side
        hi *= 2.0
        if hi > 1e300:
            raise DomainError("failed to bracket the Neyman-Pearson threshold")
    # the dual objective at gamma is b - gamma (a - target)
    dual = lambda g, side: side[2] - g * (side[1] - target)
    f_lo, f_hi = lo_side[1] - target, hi_side[1] - target
    side_hint = 0
    slow = 0
    for _ in range(300):
        a_lo, b_lo = lo_side[1:]
        a_hi, b_hi = hi_side[1:]
        t = 1.0 if a_hi == a_lo else (target - a_lo) / (a_hi - a_lo)
        beta = t * b_hi + (1 - t) * b_lo
        gap = beta - max(dual(lo, lo_side), dual(hi, hi_side))
        if gap <= 1e-13 * beta or hi - lo <= 1e-15 * hi:
            break
        width = hi - lo
        if slow >= 2 or f_hi == f_lo:
            mid, slow = 0.5 * (lo + hi), 0
        else:
            mid = lo - f_lo * width / (f_hi - f_lo)
            mid = min(max(mid, lo + 1e-3 * width), hi - 1e-3 * width)
        side = _np_side(rho, sigma, mid)
        f = side[1] - target
        if f >= 0:
            hi, hi_side, f_hi = mid, side, f
            f_lo = f_lo * 0.5 if side_hint == 1 else f_lo
            side_hint = 1
        else:
            lo, lo_side, f_lo = mid, side, f
            f_hi = f_hi * 0.5 if side_hint == -1 else f_hi
            side_hint = -1
        slow = slow + 1 if hi - lo > 0.5 * width else 0
    p_lo = lo_side[0] @ lo_side[0].conj().T
    p_hi = hi_side[0] @ hi_side[0].conj().T
    m = t * p_hi + (1 - t) * p_lo
    return HypothesisTest(-_log2(beta), m, t * hi_side[1] + (1 - t) * lo_side[1], beta,
                          max(gap, 0.0))


def dh(rho, sigma, eps):
    r"""Hypothesis-testing divergence :math:`D_H^\varepsilon` with type-I budget ``eps``.

    Returns ``-log2 min{Tr M sigma : 0 <= M <= I, Tr M rho >= 1 - eps}``;
    see :func:`dh_test` for the algorithm.
    """
    return dh_test(rho, sigma, eps).value


def _spectrum_mass(rho, sigma, gamma):
    """Tr rho {rho <= gamma sigma}, the projector onto the non-negative part."""
    x = gamma * sigma - rho
    w, v = np.linalg.eigh(x)
    cut = -1e-13 * max(np.max(np.abs(w)), 1e-300)
    keep = v[:, w >= cut]
    return float(np.real(np.einsum("ij,ik,kj->", keep.conj(), rho, keep)))


def dspec(rho, sigma, eps, samples=48):
    r"""Information-spectrum divergence :math:`\log\sup\{\gamma:\mathrm{Tr}\rho\{\rho\le\gamma\sigma\}\le\varepsilon\}`.

    The map :math:`\gamma\mapsto\mathrm{Tr}\rho\{\rho\le\gamma\sigma\}` jumps
    at the finite generalized eigenvalues of the pencil and varies
    continuously in between (it is a step function for commuting inputs).
    Candidate points around every breakpoint plus ``samples`` geometric
    points per gap are scanned; the feasible-to-infeasible transition after
    the largest feasible candidate is then located by bisection.
    """
    if not 0.0 < eps < 1.0:
        raise DomainError("eps must lie in (0, 1)")
    rho, sigma = _states(rho, sigma)
    with np.errstate(divide="ignore", invalid="ignore"):
        ev = scipy.linalg.eigvals(rho, sigma)
    ev = ev[np.isfinite(ev)]
    br = np.unique(np.real(ev[(np.abs(ev.imag) <= 1e-9 * (1 + np.abs(ev.real)))
                              & (ev.real > 1e-300)]))
    h = lambda g: _spectrum_mass(rho, sigma, g)
    top = (br[-1] if br.size else 1.0) * 1e8 + 1.0
    if h(top) <= eps:
        return math.inf
    knots = np.concatenate(([min(br[0] if br.size else 1.0, 1.0) * 1e-6], br, [top]))
    grid = [np.geomspace(a, b, samples + 2)[1:-1] for a, b in zip(knots[:-1], knots[1:])]
    cand = np.sort(np.concatenate([knots, br * (1 - 1e-9), br * (1 + 1e-9)] + grid))
    vals = np.array([h(g) for g in cand])
    feas = np.nonzero(vals <= eps)[0]
    if feas.size == 0:
        lo, hi = 0.0, cand[0]
    else:
        i = feas[-1]
        lo, hi = cand[i], cand[i + 1]
    for _ in range(200):
        if hi - lo <= 1e-14 * hi:
            break
        mid = 0.5 * (lo + hi)
        if h(mid) <= eps:
            lo = mid
        else:
            hi = mid
    return _log2(hi)


def renyi(rho, sigma, alpha, family="petz"):
    r"""Petz or sandwiched Rényi divergence in bits.

    Parameters
    ----------
    rho, sigma : array_like
    alpha : float
        Order in (0, 1) or (1, 64].
    family : {'petz', 'sandwiched'}

    Raises
    ------
    DomainError
        For ``alpha == 1`` (use :func:`umegaki`) or out-of-range orders.
    """
    if alpha == 1:
        raise DomainError("alpha = 1 is the Umegaki relative entropy")
    if not (0 < alpha < 1 or 1 < alpha <= 64):
        raise DomainError("alpha must lie in (0, 1) or (1, 64]")
    if family not in ("petz", "sandwiched"):
        raise DomainError("family must be 'petz' or 'sandwiched'")
    rho, sigma = _states(rho, sigma)
    sp = _split(rho, sigma)
    if alpha > 1 and sp.leak > TOL.support:
        return math.inf
    if alpha < 1 and float(np.real(np.trace(rho @ sigma))) <= TOL.orthogonal:
        return math.inf
    if family == "petz":
        # positive double sum over eigenpairs avoids cancellation in rho^a sigma^(1-a)
        wr, vr = np.linalg.eigh(rho)
        ws, vs = np.linalg.eigh(sigma)
        on_r, on_s = wr > TOL.support * wr[-1], ws > TOL.support * ws[-1]
        overlap = np.abs(vr[:, on_r].conj().T @ vs[:, on_s]) ** 2
        q = wr[on_r] ** alpha @ overlap @ ws[on_s] ** (1 - alpha)
    else:
        s = mc.powm_psd(sigma, (1 - alpha) / (2 * alpha))
        inner = mc.as_hermitian(s @ rho @ s)
        w = np.clip(mc.eigvalsh(inner), 0, None)
        q = np.sum(w ** alpha)
        if alpha < 1 and w[-1] > 0 and w[0] < 1e-8 * w[-1]:
            q = _sandwiched_trace_mp(rho, sigma, alpha)
    q = float(q)
    if q <= 0:
        return math.inf
    return math.log(q) / ((alpha - 1) * LN2)


def _mp_eigh(h, dps):
    with mpmath.workdps(dps):
        a = mpmath.matrix([[mpmath.mpc(complex(x)) for x in row] for row in h])
        w, v = mpmath.eighe(a)
    return w, v


def _sandwiched_trace_mp(rho, sigma, alpha):
    """``Tr (sigma^b rho sigma^b)^alpha`` with ``b = (1-alpha)/(2 alpha)`` in extended precision.

    Below ``alpha = 1`` small eigenvalues of the inner operator are raised to
    ``1/alpha`` and then back to ``alpha``, so double precision loses them.
    The working precision grows with the spread of the spectrum of ``sigma``.
    """
    ws = mc.eigvalsh(sigma)
    pos = ws[ws > TOL.support * ws[-1]]
    spread = math.log10(pos[-1] / pos[0]) if pos.size else 0.0
    dps = min(30 + int(math.ceil(spread / alpha)), 400)
    b = (1 - alpha) / (2 * alpha)
    with mpmath.workdps(dps):
        w, v = _mp_eigh(sigma, dps)
        top = max(w)
        cut = TOL.support * top
        pw = mpmath.diag([x ** b if x > cut else 0 for x in w])
        sb = v * pw * v.H
        r = mpmath.matrix([[mpmath.mpc(complex(x)) for x in row] for row in rho])
        inner = sb * r * sb
        inner = (inner + inner.H) / 2
        wi, _ = mpmath.eighe(inner)
        q = mpmath.fsum(mpmath.re(x) ** alpha for x in wi if mpmath.re(x) > 0)
    return float(q)


def binary_fidelity(p, q):
    """Bhattacharyya coefficient of the two-point distributions (p, 1-p), (q, 1-q)."""
    if not (0 <= p <= 1 and 0 <= q <= 1):
        raise DomainError("p and q must lie in [0, 1]")
    return (math.sqrt(p * q) + math.sqrt((1 - p) * (1 - q))) ** 2


def pure_closed_forms(f, eps):
    """Closed forms for pure states with overlap ``f = |<psi|phi>|^2``.

    Returns
    -------
    dtilde, dh : float
        The modified smooth max-relative entropy at ``eps`` and the
        hypothesis-testing divergence with type-I budget ``eps``.
    """
    if not (0 <= f <= 1 and 0 < eps < 1):
        raise DomainError("need f in [0, 1] and eps in (0, 1)")
    margin = f - (1 - eps)
    dt = math.inf if margin <= 0 else _log2(eps * (1 - eps) / margin)
    d_h = math.inf if eps >= f else -_log2(1 - binary_fidelity(eps, f))
    return dt, d_h


def pure_positive_part(f, lam):
    """Tr(psi - lam phi)_+ for pure states with overlap f."""
    return 0.5 * (1 - lam + math.sqrt((1 + lam) ** 2 - 4 * lam * f))


def dobs(rho, sigma, points=64):
    r"""Observational divergence :math:`\sup_M\mathrm{Tr}M\rho\log(\mathrm{Tr}M\rho/\mathrm{Tr}M\sigma)`.

    The objective increases with Tr M rho and decreases with Tr M sigma in
    the region where it is positive, so the supremum is taken along the
    Neyman-Pearson frontier ``a -> min{Tr M sigma : Tr M rho >= a}``.  The
    one-dimensional search uses a grid over ``a`` refined by bounded Brent
    minimization.  The returned value is frontier-optimal.
    """
    rho, sigma = _states(rho, sigma)
    sp = _split(rho, sigma)
    if sp.leak > TOL.support:
        return math.inf

    def obj(a):
        if a <= 0:
            return 0.0
        v = dh(rho, sigma, min(max(1.0 - a, 0.0), 1.0))
        return a * (_log2(a) + v)

    grid = np.linspace(0.0, 1.0, points + 1)[1:]
    vals = np.array([obj(a) for a in grid])
    i = int(np.argmax(vals))
    best = max(float(vals[i]), 0.0)
    lo = grid[max(i - 1, 0)] if i > 0 else 0.0
    hi = grid[min(i + 1, points - 1)]
    res = optimize.minimize_scalar(lambda a: -obj(a), bounds=(lo, hi),
                                   method="bounded", options={"xatol": 1e-12})
    return max(best, -float(res.fun))


def hilbert_metric(rho, sigma):
    """Hilbert projective metric dmax(rho||sigma) + dmax(sigma||rho)."""
    rho, sigma = _states(rho, sigma)
    a = _dmax(rho, sigma)
    b = _dmax(sigma, rho)
    return a + b
