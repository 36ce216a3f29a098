"""Dense primal-dual interior-point solver and smooth-divergence programs.

The solver works on the standard primal form

    minimize    sum_b Re Tr(C_b X_b)
    subject to  sum_b Re Tr(A_kb X_b) (= or <=) b_k,   X_b >= 0,

with every block a complex Hermitian PSD matrix (1x1 blocks are non-negative
scalars).  Iterations use Nesterov-Todd scaling and a Mehrotra
predictor-corrector.  The remaining functions build the programs for the
smoothing balls, the operator-smoothing variants, the smooth Hilbert metric
and the hypothesis-testing divergence.
"""
import dataclasses
import math

import numpy as np
import scipy.linalg
from scipy import optimize

from . import divergences as dv
from . import matcore as mc
from .divergences import SmoothingSpec
from .errors import DomainError, NumericalFailure

INFEASIBLE_BOUND = 2.0 ** 60


# ---------------------------------------------------------------------------
# program description

def sub(block, k):
    """Term ``K^dagger X_block K`` of a matrix-valued constraint."""
    return ("sub", block, np.asarray(k, dtype=complex))


def scaled(block, m):
    """Term ``x_block * M`` for a scalar (1x1) block."""
    return ("scaled", block, np.asarray(m, dtype=complex))


def _herm_basis(n):
    """Orthonormal basis of n x n Hermitian matrices under Re Tr(AB)."""
    out = []
    for i in range(n):
        e = np.zeros((n, n), complex)
        e[i, i] = 1
        out.append(e)
    r = 1 / math.sqrt(2)
    for i in range(n):
        for j in range(i + 1, n):
            e = np.zeros((n, n), complex)
            e[i, j] = e[j, i] = r
            out.append(e)
            e = np.zeros((n, n), complex)
            e[i, j], e[j, i] = 1j * r, -1j * r
            out.append(e)
    return out


@dataclasses.dataclass
class Constraint:
    coeffs: dict
    rhs: float
    relation: str = "="


class ConeProgram:
    """Linear program over a product of Hermitian PSD cones.

    Blocks are added with :meth:`add_block`; constraints are either scalar
    (:meth:`add_constraint`, coefficients given per block as Hermitian
    matrices acting through ``Re Tr(A X)``) or matrix-valued
    (:meth:`add_matrix_equality`), which expands into one real equation per
    element of an orthonormal Hermitian basis.
    """

    def __init__(self):
        self.blocks = []
        self.names = []
        self.objective = {}
        self.constraints = []

    def add_block(self, dim, name=None):
        self.blocks.append(int(dim))
        self.names.append(name or f"X{len(self.blocks) - 1}")
        return len(self.blocks) - 1

    def add_objective(self, block, c):
        c = mc.as_hermitian(np.atleast_2d(c))
        self.objective[block] = self.objective.get(block, 0) + c

    def add_constraint(self, coeffs, rhs, relation="="):
        if relation not in ("=", "<="):
            raise DomainError("relation must be '=' or '<='")
        cf = {b: mc.as_hermitian(np.atleast_2d(a)) for b, a in coeffs.items()}
        for b, a in cf.items():
            if a.shape != (self.blocks[b],) * 2:
                raise DomainError(f"coefficient shape mismatch on block {b}")
        self.constraints.append(Constraint(cf, float(rhs), relation))

    def add_matrix_equality(self, terms, rhs):
        """Impose ``sum(terms) == rhs`` for Hermitian matrix expressions."""
        rhs = mc.as_hermitian(np.atleast_2d(rhs))
        for e in _herm_basis(rhs.shape[0]):
            coeffs = {}
            for kind, b, k in terms:
                if kind == "sub":
                    a = k @ e @ k.conj().T
                else:
                    a = np.array([[np.real(np.trace(e @ k))]])
                coeffs[b] = coeffs.get(b, 0) + a
            self.add_constraint(coeffs, float(np.real(np.trace(e @ rhs))), "=")

    @property
    def total_dim(self):
        return sum(self.blocks)


@dataclasses.dataclass
class ConeSolution:
    """Result of :func:`solve`.

    ``primal`` holds the block matrices of the user's blocks (slacks
    dropped); ``dual`` the multipliers of the constraints in input order,
    with the sign convention ``S = C - sum_k y_k A_k``.
    """

    status: str
    primal: list
    dual: np.ndarray
    objective: float
    dual_objective: float
    gap: float
    primal_residual: float
    dual_residual: float
    iterations: int
    trace: list = dataclasses.field(default_factory=list, repr=False)


# ---------------------------------------------------------------------------
# interior-point method

def _chol(x):
    try:
        return np.linalg.cholesky(x)
    except np.linalg.LinAlgError:
        w, v = np.linalg.eigh(x)
        w = np.clip(w, 1e-300, None)
        q, r = np.linalg.qr((v * np.sqrt(w)).conj().T)
        # x = r^H r, so r^H is a (possibly non-triangular) square root
        return r.conj().T


def _max_step(lam, d):
    """Largest alpha with diag(lam) + alpha d >= 0."""
    if len(lam) == 1:
        dv = d[0, 0].real
        if not math.isfinite(dv):
            return 0.0
        return math.inf if dv >= 0 else max(lam[0], 1e-150) / -dv
    s = 1.0 / np.sqrt(np.maximum(lam, 1e-150))
    a = (d * s[:, None]) * s[None, :]
    if not np.all(np.isfinite(a)):
        return 0.0
    w = np.linalg.eigvalsh(a)
    return math.inf if w[0] >= 0 else -1.0 / w[0]


def _herm(a):
    return 0.5 * (a + a.conj().T)


class _Standard:
    """Program in standard form with slack blocks and scaled rows."""

    def __init__(self, prog):
        cons = prog.constraints
        self.m = len(cons)
        dims = list(prog.blocks)
        n_user = len(dims)
        slack_of = {}
        for k, c in enumerate(cons):
            if c.relation == "<=":
                slack_of[k] = len(dims)
                dims.append(1)
        self.dims, self.n_user = dims, n_user
        self.A = [np.zeros((self.m, n, n), complex) for n in dims]
        b = np.zeros(self.m)
        for k, c in enumerate(cons):
            for blk, a in c.coeffs.items():
                self.A[blk][k] += a
            if k in slack_of:
                self.A[slack_of[k]][k, 0, 0] = 1.0
            b[k] = c.rhs
        norms = np.sqrt(sum(np.sum(np.abs(a) ** 2, axis=(1, 2)) for a in self.A))
        if np.any(norms == 0):
            raise DomainError("constraint with all-zero coefficients")
        self.row_scale = norms
        for a in self.A:
            a /= norms[:, None, None]
        self.b = b / norms
        self.C = [np.zeros((n, n), complex) for n in dims]
        for blk, c in prog.objective.items():
            self.C[blk] = self.C[blk] + c
        self.c_scale = max(1.0, max(np.linalg.norm(c) for c in self.C))
        self.C = [c / self.c_scale for c in self.C]

        self.flat = [a.reshape(self.m, -1) for a in self.A]

    def apply(self, xs):
        return _apply(self.flat, xs)

    def adjoint(self, y):
        return _adjoint(self.flat, y, self.dims)


def _apply(flat, xs):
    """k -> sum_b Re Tr(A_kb X_b) for Hermitian X_b."""
    return sum(np.real(f @ x.conj().ravel()) for f, x in zip(flat, xs))


def _adjoint(flat, y, dims):
    return [(y @ f).reshape(n, n) for f, n in zip(flat, dims)]


def _inner(xs, ss):
    return float(sum(np.real(np.vdot(x, s)) for x, s in zip(xs, ss)))


# overflow in hopeless iterates is detected explicitly and falls back to the best one
@np.errstate(over="ignore", invalid="ignore")
def solve(program, max_iter=100, tol=1e-9):
    """Solve a :class:`ConeProgram` with a primal-dual interior-point method.

    Parameters
    ----------
    program : ConeProgram
    max_iter : int
        Iteration cap.
    tol : float
        Target for relative primal/dual infeasibility and duality gap.

    Returns
    -------
    ConeSolution
        ``status`` is ``'optimal'``, ``'inaccurate'`` (stalled with residuals
        and gap below 1e-6), ``'infeasible'``, ``'unbounded'`` or
        ``'max_iter'``.

    Raises
    ------
    NumericalFailure
        When the step lengths collapse before convergence.
    """
    if program.total_dim > 128:
        raise DomainError("total block dimension exceeds 128")
    st = _Standard(program)
    dims, A, b, C = st.dims, st.A, st.b, st.C
    m = st.m
    n_tot = sum(dims)
    norm_b, norm_c = np.linalg.norm(b), math.sqrt(sum(np.linalg.norm(c) ** 2 for c in C))
    X, S = [], []
    for n, a, c in zip(dims, A, C):
        an = np.sqrt(np.sum(np.abs(a) ** 2, axis=(1, 2)))
        xi = max(10.0, math.sqrt(n), n * float(np.max((1 + np.abs(b)) / (1 + an))))
        eta = max(10.0, math.sqrt(n), float(np.max(an)), float(np.linalg.norm(c)))
        X.append(xi * np.eye(n, dtype=complex))
        S.append(eta * np.eye(n, dtype=complex))
    y = np.zeros(m)
    trace = []
    best = (math.inf, None, None, None)
    best_pinf = math.inf
    stall = 0
    small_steps = 0
    status = "max_iter"
    it = 0
    for it in range(1, max_iter + 1):
        rp = b - st.apply(X)
        aty = st.adjoint(y)
        rd = [c - s - t for c, s, t in zip(C, S, aty)]
        pobj = _inner(C, X)
        dobj = float(b @ y)
        mu = _inner(X, S) / n_tot
        pinf = np.linalg.norm(rp) / (1 + norm_b)
        dinf = math.sqrt(sum(np.linalg.norm(r) ** 2 for r in rd)) / (1 + norm_c)
        gap = abs(pobj - dobj) / (1 + abs(pobj) + abs(dobj))
        trace.append(dict(it=it, pobj=pobj, dobj=dobj, pinf=pinf, dinf=dinf, mu=mu))
        merit = max(pinf, dinf, gap)
        if merit < best[0]:
            best = (merit, [x.copy() for x in X], y.copy(), [s.copy() for s in S])
        if merit <= tol:
            status = "optimal"
            break
        if best[0] <= 1e-7 and (merit > 100 * best[0] or mu < 1e-14 * (1 + abs(pobj))):
            # numerical noise has taken over; fall back to the best iterate
            status = "optimal"
            _, X, y, S = best
            break
        if dobj > INFEASIBLE_BOUND and pinf > 1e-6:
            status = "infeasible"
            break
        if -pobj > INFEASIBLE_BOUND and dinf > 1e-6:
            status = "unbounded"
            break
        if pinf < 0.99 * best_pinf:
            best_pinf, stall = pinf, 0
        else:
            stall += 1
        if stall >= 20 and dobj > 1e6 * (1 + abs(pobj)):
            status = "infeasible"
            break

        # Nesterov-Todd scaling: R^H S R = Lambda = R^{-1} X R^{-H}
        R, lam, At = [], [], []
        for x, s, a in zip(X, S, A):
            lx, ls = _chol(x), _chol(s)
            u, sv, vh = np.linalg.svd(ls.conj().T @ lx)
            sv = np.clip(sv, 1e-300, None)
            r = lx @ vh.conj().T / np.sqrt(sv)
            R.append(r)
            lam.append(sv)
            At.append((r.conj().T @ a @ r).reshape(m, -1))
        G = np.concatenate(At, axis=1)
        M = np.real(G @ G.conj().T)
        if not np.all(np.isfinite(M)):
            if best[0] > 1e-6:
                raise NumericalFailure("scaling matrix overflowed", trace)
            status = "optimal" if best[0] <= 1e-7 else "inaccurate"
            _, X, y, S = best
            break
        # M = Gr Gr^T; the triangular factor from QR of Gr^T is accurate where
        # a Cholesky factor of the formed M would square cond(G).  Near-singular
        # M (degenerate or infeasible programs) keeps the Cholesky path with its
        # regularised fallback.
        gr = np.concatenate([G.real, G.imag], axis=1)
        tri = scipy.linalg.qr(gr.T, mode="r", check_finite=False)[0][:m]
        diag = np.abs(np.diag(tri))
        if np.min(diag) > 1e-8 * np.max(diag):
            solve_m = lambda v: scipy.linalg.solve_triangular(
                tri, scipy.linalg.solve_triangular(tri, v, trans="T", check_finite=False),
                check_finite=False)
        else:
            try:
                cho = scipy.linalg.cho_factor(M, check_finite=False)
                solve_m = lambda v: scipy.linalg.cho_solve(cho, v, check_finite=False)
            except np.linalg.LinAlgError:
                reg = M + 1e-14 * np.trace(M) / m * np.eye(m)
                solve_m = lambda v: np.linalg.lstsq(reg, v, rcond=None)[0]
        rdt = [r.conj().T @ d @ r for r, d in zip(R, rd)]

        def direction(T):
            rhs = rp - _apply(At, [t - d for t, d in zip(T, rdt)])
            dy = solve_m(rhs)
            ds = [d - a for d, a in zip(rdt, _adjoint(At, dy, dims))]
            dx = [t - s for t, s in zip(T, ds)]
            return dx, dy, ds

        def steps(dx, ds):
            ap = min(_max_step(l, d) for l, d in zip(lam, dx))
            ad = min(_max_step(l, d) for l, d in zip(lam, ds))
            return ap, ad

        dxa, _, dsa = direction([-np.diag(l).astype(complex) for l in lam])
        ap, ad = steps(dxa, dsa)
        ap, ad = min(1.0, ap), min(1.0, ad)
        mu_aff = sum(np.real(np.trace((np.diag(l) + ap * dx) @ (np.diag(l) + ad * ds)))
                     for l, dx, ds in zip(lam, dxa, dsa)) / n_tot
        sig = min(1.0, max(0.0, mu_aff / mu)) ** 3
        T = []
        for l, dx, ds in zip(lam, dxa, dsa):
            z = sig * mu * np.eye(len(l)) - np.diag(l * l) - 0.5 * (dx @ ds + ds @ dx)
            T.append(2 * z / (l[:, None] + l[None, :]))
        dx, dy, ds = direction(T)
        ap, ad = steps(dx, ds)
        ap, ad = min(1.0, 0.98 * ap), min(1.0, 0.98 * ad)
        if min(ap, ad) < 1e-10:
            small_steps += 1
            if small_steps >= 5:
                if best[0] > 1e-6:
                    raise NumericalFailure("interior-point steps collapsed", trace)
                status = "optimal" if best[0] <= 1e-7 else "inaccurate"
                _, X, y, S = best
                break
        else:
            small_steps = 0
        if not all(np.all(np.isfinite(d)) for d in dx + ds):
            if best[0] > 1e-6:
                raise NumericalFailure("non-finite search direction", trace)
            status = "optimal" if best[0] <= 1e-7 else "inaccurate"
            _, X, y, S = best
            break
        X = [_herm(x + ap * (r @ d @ r.conj().T)) for x, r, d in zip(X, R, dx)]
        # unscaled dual step rd - A^T dy avoids the conditioning of R^{-1}
        dS = [d - a for d, a in zip(rd, st.adjoint(dy))]
        S = [_herm(s + ad * d) for s, d in zip(S, dS)]
        y = y + ad * dy

    if status == "max_iter" and best[0] <= 1e-6:
        status = "optimal" if best[0] <= 1e-7 else "inaccurate"
        _, X, y, S = best
    rp = b - st.apply(X)
    rd = [c - s - t for c, s, t in zip(C, S, st.adjoint(y))]
    pobj = _inner(C, X) * st.c_scale
    dobj = float(b @ y) * st.c_scale
    return ConeSolution(
        status=status,
        primal=X[:st.n_user],
        dual=y / st.row_scale * st.c_scale,
        objective=pobj,
        dual_objective=dobj,
        gap=abs(pobj - dobj) / (1 + abs(pobj) + abs(dobj)),
        primal_residual=float(np.linalg.norm(rp * st.row_scale)),
        dual_residual=math.sqrt(sum(np.linalg.norm(r) ** 2 for r in rd)) * st.c_scale,
        iterations=it,
        trace=trace,
    )


def _optimal(sol, what):
    if sol.status in ("optimal", "inaccurate"):
        return sol
    if sol.status == "max_iter" and sol.gap <= 1e-7 and sol.primal_residual <= 1e-8:
        return sol
    if sol.status in ("infeasible", "unbounded"):
        return sol
    raise NumericalFailure(f"{what}: solver ended with status {sol.status}", sol.trace)


# ---------------------------------------------------------------------------
# smoothing-ball programs

def _commuting_basis(rho, sigma):
    """Common eigenbasis of commuting rho and sigma, or None."""
    if not mc.commutes(rho, sigma):
        return None
    _, v = np.linalg.eigh(rho + (math.pi / 3) * sigma)
    p = v.conj().T @ rho @ v
    q = v.conj().T @ sigma @ v
    off = lambda x: np.linalg.norm(x - np.diag(np.diag(x)))
    if off(p) > 1e-10 or off(q) > 1e-10:
        return None
    return np.clip(np.real(np.diag(p)), 0, None), np.clip(np.real(np.diag(q)), 0, None)


def _smooth_lp(p, q, eps, normalised):
    """Linear program for the trace ball with commuting inputs."""
    n = len(p)
    # variables: p' (n), x (n), lambda
    c = np.zeros(2 * n + 1)
    c[-1] = 1.0
    eye = np.eye(n)
    a_ub = [np.hstack([eye, np.zeros((n, n)), -q[:, None]]),
            np.hstack([-eye, -eye, np.zeros((n, 1))]),
            np.concatenate([np.zeros(n), np.ones(n), [0.0]])[None, :]]
    b_ub = [np.zeros(n), -p, [eps]]
    tr = np.concatenate([np.ones(n), np.zeros(n), [0.0]])[None, :]
    kw = {}
    if normalised:
        kw = dict(A_eq=tr, b_eq=[1.0])
    else:
        a_ub.append(tr)
        b_ub.append([1.0])
    res = optimize.linprog(c, A_ub=np.vstack(a_ub), b_ub=np.concatenate(b_ub),
                           bounds=(0, None), method="highs",
                           options=dict(primal_feasibility_tolerance=1e-10,
                                        dual_feasibility_tolerance=1e-10), **kw)
    if res.status == 2:
        return math.inf
    if res.status != 0:
        raise NumericalFailure(f"linear program failed: {res.message}")
    return res.fun


def _ball_program(rho, sigma, spec, prog, phase_one=False):
    """Add the smoothed operator P (on supp sigma) and the ball constraint.

    Returns the block index of P and the isometry V with rho' = V P V^dagger.
    With ``phase_one`` the radius constraint is left out and its left-hand
    side becomes the objective instead (minimized for the trace ball,
    maximized for the purified one).
    """
    d = rho.shape[0]
    v = mc.support_basis(sigma)
    r = v.shape[1]
    eps = spec.epsilon
    if spec.metric == "trace":
        p = prog.add_block(r, "rho_prime")
        x = prog.add_block(d, "X")
        s2 = prog.add_block(d, "X_minus_gap")
        _trace_ball_equality(prog, s2, x, p, v, rho)
        if phase_one:
            prog.add_objective(x, np.eye(d))
        else:
            prog.add_constraint({x: np.eye(d)}, eps, "<=")
        blk, sel = p, np.eye(r)
    else:
        u = mc.support_basis(rho)
        k = u.shape[1]
        rho_r = u.conj().T @ rho @ u
        bb = prog.add_block(k + r, "fidelity_block")
        top = np.vstack([np.eye(k), np.zeros((r, k))])
        bot = np.vstack([np.zeros((k, r)), np.eye(r)])
        prog.add_matrix_equality([sub(bb, top)], rho_r)
        cz = np.zeros((k + r, k + r), complex)
        cz[k:, :k] = v.conj().T @ u
        overlap = -0.5 * (cz + cz.conj().T)
        if phase_one:
            prog.add_objective(bb, overlap)
        else:
            thr = math.sqrt(max(1.0 - eps * eps, 0.0))
            prog.add_constraint({bb: overlap}, -thr, "<=")
        blk, sel = bb, bot
    rel = "=" if spec.normalisation == "normalised" else "<="
    prog.add_constraint({blk: sel @ sel.conj().T}, 1.0, rel)
    return blk, sel, v


def _trace_ball_equality(prog, s2, x, p, v, rho):
    """S2 - X - V P V^dagger = -rho, i.e. S2 = X - (rho - rho')."""
    d = rho.shape[0]
    n_p = prog.blocks[p]
    for e in _herm_basis(d):
        prog.add_constraint({s2: e, x: -e, p: -(v.conj().T @ e @ v).reshape(n_p, n_p)},
                            float(np.real(np.trace(-e @ rho))), "=")


def _domination(prog, blk, sel, sigma_s, scale_block):
    """sel^dagger X_blk sel <= lambda sigma_s via slack S1 = lambda sigma_s - P."""
    r = sigma_s.shape[0]
    s1 = prog.add_block(r, "domination_slack")
    prog.add_matrix_equality([sub(s1, np.eye(r)), sub(blk, sel), scaled(scale_block, -sigma_s)],
                             np.zeros((r, r)))
    return s1


def _ball_reaches_support(rho, sigma, spec):
    """Whether the ball holds an operator supported on supp sigma.

    Solves the always-feasible program that optimizes the radius constraint
    on its own.  Returns the margin (positive when the ball reaches the
    support), which is in units of trace distance or of the overlap.
    """
    prog = ConeProgram()
    _ball_program(rho, sigma, spec, prog, phase_one=True)
    sol = _optimal(solve(prog), "ball feasibility")
    if spec.metric == "trace":
        return spec.epsilon - sol.objective
    return -sol.objective - math.sqrt(max(1.0 - spec.epsilon ** 2, 0.0))


def _prepare(rho, sigma):
    return mc.as_state(rho, "rho"), mc.as_state(sigma, "sigma")


def _solve_in_units(build, what):
    """Solve ``build(1)``, a program minimizing lambda with ``lambda unit sigma`` in it.

    When the first solve stalls short of a 1e-8 gap (large lambda with a
    badly conditioned sigma), it is repeated with lambda measured in units of
    the first optimum and the tighter certificate is kept, mapped back to the
    original units (``lambda = unit lambda'``, duals ``y = unit y'``).
    """
    sol = _optimal(solve(build(1.0)), what)
    if sol.status not in ("optimal", "inaccurate") or sol.gap <= 1e-8 or not sol.objective > 0:
        return sol
    unit = sol.objective
    try:
        again = _optimal(solve(build(unit)), what)
    except NumericalFailure:
        return sol
    if again.status not in ("optimal", "inaccurate") or again.gap >= sol.gap:
        return sol
    primal = [again.primal[0] * unit] + list(again.primal[1:])
    return dataclasses.replace(again, primal=primal, dual=again.dual * unit,
                               objective=again.objective * unit,
                               dual_objective=again.dual_objective * unit)


def smooth_dmax(rho, sigma, spec, return_solution=False):
    """Smooth max-relative entropy over one of the four smoothing balls.

    Parameters
    ----------
    rho, sigma : array_like
        Density matrices.
    spec : SmoothingSpec
        Ball metric, normalisation and radius.
    return_solution : bool
        Also return the :class:`ConeSolution` (``None`` on closed-form or LP
        paths).

    Returns
    -------
    float
        Value in bits; ``inf`` if no operator of the ball is dominated by a
        multiple of sigma.
    """
    rho, sigma = _prepare(rho, sigma)
    eps = spec.epsilon
    out = lambda val, sol=None: (val, sol) if return_solution else val
    if eps == 0.0:
        return out(dv.dmax(rho, sigma))
    if eps >= 1.0:
        return out(0.0 if spec.normalisation == "normalised" else -math.inf)
    normalised = spec.normalisation == "normalised"
    if spec.metric == "trace":
        cb = _commuting_basis(rho, sigma)
        if cb is not None:
            return out(dv._log2(_smooth_lp(cb[0], cb[1], eps, normalised)))
    # mass outside supp sigma makes feasibility a threshold question; decide it
    # first, since the interior-point method cannot certify infeasibility here.
    # A ball that just touches the support is feasible and left to the solver.
    if dv._split(rho, sigma).leak > dv.EPS_TOL and _ball_reaches_support(rho, sigma, spec) < -1e-8:
        return out(math.inf)
    def build(unit):
        prog = ConeProgram()
        lam = prog.add_block(1, "lambda")
        prog.add_objective(lam, [[1.0]])
        blk, sel, v = _ball_program(rho, sigma, spec, prog)
        _domination(prog, blk, sel, unit * (v.conj().T @ sigma @ v), lam)
        return prog

    sol = _solve_in_units(build, "smooth_dmax")
    if sol.status == "infeasible":
        return out(math.inf, sol)
    return out(dv._log2(sol.objective), sol)


def smooth_dmax_variants(rho, sigma, eps, variant):
    """Max-relative entropy smoothed over operators instead of states.

    Parameters
    ----------
    rho, sigma : array_like
    eps : float
        In [0, 1).
    variant : {'pos', 'herm_sub', 'herm_eq'}
        ``pos``: PSD Z with Z <= lambda sigma and Tr(rho - Z)_+ <= eps.
        ``herm_sub``/``herm_eq``: Hermitian X <= lambda sigma with
        Tr X <= 1 (resp. = 1) and Tr(rho - X)_+ <= eps.
    """
    if variant not in ("pos", "herm_sub", "herm_eq"):
        raise DomainError("variant must be 'pos', 'herm_sub' or 'herm_eq'")
    if not 0.0 <= eps < 1.0:
        raise DomainError("eps must lie in [0, 1)")
    rho, sigma = _prepare(rho, sigma)
    d = rho.shape[0]
    if variant == "pos":
        # inf Tr(rho - Z)_+ over Z >= 0 on supp sigma is the leak, attained only
        # when rho commutes with the support projector; below it the program is
        # infeasible only in the limit, which the solver cannot certify
        split = dv._split(rho, sigma)
        if eps < split.leak - dv.EPS_TOL or (eps <= split.leak + dv.EPS_TOL and not split.commuting):
            return math.inf
        # the solver's gap is relative to 1 + |objective|; a second solve with
        # lambda measured in units of the first optimum makes it relative to lambda
        lam1 = _pos_variant_lambda(rho, sigma, eps, 1.0)
        if not 0.0 < lam1 < math.inf:
            return dv._log2(lam1)
        return dv._log2(lam1 * _pos_variant_lambda(rho, sigma, eps, lam1))
    prog = ConeProgram()
    lam = prog.add_block(1, "lambda")
    prog.add_objective(lam, [[1.0]])
    # X = lambda sigma - S1 with S1 >= 0; S2 = Y - rho + X >= 0
    s1 = prog.add_block(d, "domination_slack")
    y = prog.add_block(d, "Y")
    s2 = prog.add_block(d, "Y_minus_gap")
    for e in _herm_basis(d):
        prog.add_constraint({s2: e, s1: e, y: -e,
                             lam: [[-float(np.real(np.trace(e @ sigma)))]]},
                            float(np.real(np.trace(-e @ rho))), "=")
    prog.add_constraint({y: np.eye(d)}, eps, "<=")
    rel = "<=" if variant == "herm_sub" else "="
    prog.add_constraint({lam: [[1.0]], s1: -np.eye(d)}, 1.0, rel)
    sol = _optimal(solve(prog), "smooth_dmax_variants")
    if sol.status == "infeasible":
        return math.inf
    return dv._log2(sol.objective)


def _pos_variant_lambda(rho, sigma, eps, unit):
    """Least lambda (in units of ``unit``) with PSD Z <= lambda unit sigma, Tr(rho - Z)_+ <= eps."""
    d = rho.shape[0]
    prog = ConeProgram()
    lam = prog.add_block(1, "lambda")
    prog.add_objective(lam, [[1.0]])
    v = mc.support_basis(sigma)
    r = v.shape[1]
    p = prog.add_block(r, "Z")
    x = prog.add_block(d, "Y")
    s2 = prog.add_block(d, "Y_minus_gap")
    _trace_ball_equality(prog, s2, x, p, v, rho)
    prog.add_constraint({x: np.eye(d)}, eps, "<=")
    _domination(prog, p, np.eye(r), unit * (v.conj().T @ sigma @ v), lam)
    sol = _optimal(solve(prog), "smooth_dmax_variants")
    if sol.status == "infeasible":
        return math.inf
    return sol.objective


def _hilbert_tau(rho, sigma, spec, s):
    """max tau with tau sigma <= rho' <= 2^s sigma over the normalised ball."""
    prog = ConeProgram()
    tau = prog.add_block(1, "tau")
    prog.add_objective(tau, [[-1.0]])
    big = prog.add_block(1, "scale")
    prog.add_constraint({big: [[1.0]]}, 2.0 ** s, "=")
    blk, sel, v = _ball_program(rho, sigma, spec, prog)
    sigma_s = v.conj().T @ sigma @ v
    r = sigma_s.shape[0]
    _domination(prog, blk, sel, sigma_s, big)
    s3 = prog.add_block(r, "lower_slack")
    # S3 = P - tau sigma_s
    n_b = prog.blocks[blk]
    for e in _herm_basis(r):
        prog.add_constraint({s3: e, blk: -(sel @ e @ sel.conj().T).reshape(n_b, n_b),
                             tau: [[float(np.real(np.trace(e @ sigma_s)))]]}, 0.0, "=")
    sol = solve(prog)
    if sol.status == "infeasible":
        return 0.0
    sol = _optimal(sol, "smooth_hilbert")
    return max(-sol.objective, 0.0)


def smooth_hilbert(rho, sigma, spec, iterations=60, s_max=64.0):
    """Smooth Hilbert projective metric over a normalised ball.

    Minimizes ``s - log2 tau(s)`` over the split ``s = Dmax(rho'||sigma)``,
    where ``tau(s)`` is the largest tau with ``tau sigma <= rho' <= 2^s sigma``
    for some rho' in the ball.  The objective is quasi-convex in ``2^s``, so
    a bounded Brent search is used on ``[s_min, phi(s_min)]`` with ``s_min``
    the smooth max-relative entropy of the same ball; ``tau <= 1`` makes
    ``phi(s) >= s``, so the minimizer cannot lie beyond ``phi(s_min)``.
    """
    if spec.normalisation != "normalised":
        raise DomainError("smooth_hilbert supports normalised balls only")
    if not 0.0 < spec.epsilon < 1.0:
        raise DomainError("epsilon must lie in (0, 1)")
    rho, sigma = _prepare(rho, sigma)
    s_min = smooth_dmax(rho, sigma, spec)
    if math.isinf(s_min) or s_min > s_max:
        return math.inf
    s_lo = max(s_min, 0.0) + 1e-6

    def phi(s):
        try:
            t = _hilbert_tau(rho, sigma, spec, s)
        except NumericalFailure:
            # near s_min the ball meets the domination cone in a single point
            return math.inf
        return math.inf if t <= 0 else s - math.log2(t)

    # tau <= 1 gives phi(s) >= s, so any finite phi value bounds the minimizer
    step, f_hi = 1.0, math.inf
    while math.isinf(f_hi):
        if s_lo + step > s_max:
            return math.inf
        f_hi = phi(s_lo + step)
        step *= 2.0
    s_hi = min(f_hi, s_max)
    if s_hi - s_lo <= 1e-9:
        return float(f_hi)
    res = optimize.minimize_scalar(phi, bounds=(s_lo, s_hi), method="bounded",
                                   options=dict(xatol=1e-10, maxiter=iterations))
    return float(min(res.fun, f_hi))


def dh_sdp(rho, sigma, eps, return_solution=False):
    """Hypothesis-testing divergence with type-I budget ``eps`` as an SDP.

    Solves ``log2 sup{z : 0 <= M <= z I, Tr M rho >= z (1 - eps),
    Tr M sigma <= 1}``.
    """
    if not 0.0 < eps < 1.0:
        raise DomainError("eps must lie in (0, 1)")
    rho, sigma = _prepare(rho, sigma)
    out = lambda val, sol=None: (val, sol) if return_solution else val
    leak = dv._split(rho, sigma).leak
    if leak >= 1.0 - eps - dv.EPS_TOL:
        return out(math.inf)
    d = rho.shape[0]
    prog = ConeProgram()
    z = prog.add_block(1, "z")
    m = prog.add_block(d, "M")
    s = prog.add_block(d, "zI_minus_M")
    prog.add_objective(z, [[-1.0]])
    for e in _herm_basis(d):
        prog.add_constraint({s: e, m: e, z: [[-float(np.real(np.trace(e)))]]}, 0.0, "=")
    prog.add_constraint({z: [[1.0 - eps]], m: -rho}, 0.0, "<=")
    prog.add_constraint({m: sigma}, 1.0, "<=")
    sol = _optimal(solve(prog), "dh_sdp")
    if sol.status == "unbounded":
        return out(math.inf, sol)
    return out(dv._log2(-sol.objective), sol)
