"""Dense Hermitian linear algebra.

Eigendecompositions, PSD matrix functions, distance measures between states,
the operator geometric mean and small tensor-product utilities.  Operators are
plain complex ``numpy`` arrays; the ``as_*`` validators symmetrize and check
them.
"""
from typing import NamedTuple

import numpy as np

from .config import TOL
from .errors import ConvergenceFailure, DimensionCap, DomainError, SingularInput

MAX_DIM = 4096


class SpectralDecomposition(NamedTuple):
    """Eigenvalues in descending order and matching eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self):
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


class Distances(NamedTuple):
    trace_dist: float
    gen_trace_dist: float
    fidelity: float
    purified_dist: float


def as_hermitian(x):
    """Return ``(x + x^dagger)/2`` as a complex square array.

    Parameters
    ----------
    x : array_like
        Square matrix, or a 1-d vector interpreted as a diagonal.

    Returns
    -------
    numpy.ndarray
    """
    a = np.asarray(x, dtype=complex)
    if a.ndim == 1:
        a = np.diag(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise DomainError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise DomainError("matrix has non-finite entries")
    return 0.5 * (a + a.conj().T)


def as_substate(x, name="operator"):
    """Validate a PSD operator with trace at most one."""
    a = as_hermitian(x)
    lmin = np.linalg.eigvalsh(a)[0]
    if lmin < -TOL.psd:
        raise DomainError(f"{name} is not PSD (smallest eigenvalue {lmin:.3e})")
    if np.trace(a).real > 1 + TOL.trace:
        raise DomainError(f"{name} has trace {np.trace(a).real:.12g} > 1")
    return a


def as_state(x, name="state"):
    """Validate a density matrix (PSD, unit trace)."""
    a = as_substate(x, name)
    tr = np.trace(a).real
    if abs(tr - 1) > TOL.trace:
        raise DomainError(f"{name} has trace {tr:.12g}, expected 1")
    return a


def eig_hermitian(h):
    """Eigendecomposition with eigenvalues sorted in descending order.

    Parameters
    ----------
    h : array_like
        Hermitian matrix.

    Returns
    -------
    SpectralDecomposition
    """
    a = as_hermitian(h)
    try:
        w, v = np.linalg.eigh(a)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(str(exc)) from exc
    return SpectralDecomposition(w[::-1].copy(), v[:, ::-1].copy())


def eigvalsh(h):
    """Ascending eigenvalues of an already Hermitian array."""
    try:
        return np.linalg.eigvalsh(h)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(str(exc)) from exc


def positive_part_trace(h):
    r"""Trace of the positive part, :math:`\mathrm{Tr}(H)_+`.

    Equals :math:`\max_{0\le M\le I}\mathrm{Tr}[MH]`.
    """
    w = eigvalsh(as_hermitian(h))
    return float(np.sum(w[w > 0]))


def positive_projector(h, strict=True):
    """Projector onto the positive (or non-negative) eigenspace of ``h``."""
    w, v = np.linalg.eigh(h)
    keep = w > 0 if strict else w >= 0
    vk = v[:, keep]
    return vk @ vk.conj().T


def psd_function(h, fun, cutoff=None):
    """Apply ``fun`` to the eigenvalues of a PSD matrix.

    Eigenvalues below ``cutoff`` (default: relative support tolerance) are
    treated as exact zeros and mapped to 0, so ``fun`` only sees the support.
    Negative eigenvalues within ``-TOL.psd`` are clamped.
    """
    w, v = np.linalg.eigh(h)
    scale = max(w[-1], 0.0)
    if cutoff is None:
        cutoff = TOL.support * scale
    on = w > cutoff
    fw = np.zeros_like(w)
    fw[on] = fun(w[on])
    return (v * fw) @ v.conj().T


def sqrtm_psd(h):
    """Square root of a PSD matrix with small negative eigenvalues clamped."""
    w, v = np.linalg.eigh(h)
    w = np.sqrt(np.clip(w, 0.0, None))
    return (v * w) @ v.conj().T


def powm_psd(h, p):
    """Power ``h**p`` on the support of ``h`` (pseudo-inverse for ``p < 0``)."""
    return psd_function(h, lambda x: x ** p)


def logm_psd(h):
    """Natural logarithm on the support of ``h`` (zero on the kernel)."""
    return psd_function(h, np.log)


def support_basis(h, tol=None):
    """Orthonormal columns spanning the support of a PSD matrix."""
    tol = TOL.support if tol is None else tol
    w, v = np.linalg.eigh(as_hermitian(h))
    scale = max(w[-1], 0.0)
    return v[:, w > tol * scale] if scale > 0 else v[:, :0]


def support_projector(h, tol=None):
    """Projector onto the span of eigenvectors with eigenvalue > tol * lambda_max.

    Parameters
    ----------
    h : array_like
        PSD matrix.
    tol : float, optional
        Relative cutoff, default ``TOL.support``.

    Returns
    -------
    numpy.ndarray
    """
    v = support_basis(h, tol)
    return v @ v.conj().T


def commutes(a, b, tol=1e-10):
    """True if ``||ab - ba||`` is negligible relative to ``||a|| ||b||``."""
    c = a @ b - b @ a
    scale = max(np.linalg.norm(a) * np.linalg.norm(b), 1e-300)
    return np.linalg.norm(c) <= tol * scale


def fidelity(rho, rho_p):
    r"""Uhlmann fidelity :math:`\|\sqrt\rho\sqrt{\rho'}\|_1^2`."""
    s = np.linalg.svd(sqrtm_psd(rho) @ sqrtm_psd(rho_p), compute_uv=False)
    return float(np.sum(s) ** 2)


def distances(rho, rho_p):
    r"""Trace, generalised trace and purified distances plus fidelity.

    Parameters
    ----------
    rho : array_like
        Normalised state.
    rho_p : array_like
        Subnormalised state.

    Returns
    -------
    Distances
        ``trace_dist`` is :math:`\tfrac12\|\rho-\rho'\|_1`,
        ``gen_trace_dist`` is :math:`\mathrm{Tr}(\rho-\rho')_+`,
        ``fidelity`` is Uhlmann's and ``purified_dist`` is
        :math:`\sqrt{1-F}`.
    """
    rho = as_state(rho, "rho")
    rho_p = as_substate(rho_p, "rho_prime")
    w = eigvalsh(rho - rho_p)
    td = 0.5 * float(np.sum(np.abs(w)))
    gen = float(np.sum(w[w > 0]))
    f = min(fidelity(rho, rho_p), 1.0)
    return Distances(td, gen, f, float(np.sqrt(max(1.0 - f, 0.0))))


def geometric_mean(a, b):
    r"""Operator geometric mean :math:`A\#B`.

    Computed on the support of :math:`A+B` using whichever operand is
    invertible there, via :math:`A^{1/2}(A^{-1/2}BA^{-1/2})^{1/2}A^{1/2}`
    (or the same expression with the roles swapped, the mean being
    symmetric).

    Parameters
    ----------
    a, b : array_like
        PSD matrices of equal dimension.

    Returns
    -------
    numpy.ndarray

    Raises
    ------
    SingularInput
        If neither operand is invertible on the joint support.
    """
    a = as_hermitian(a)
    b = as_hermitian(b)
    v = support_basis(a + b)
    d = a.shape[0]
    if v.shape[1] == 0:
        return np.zeros((d, d), dtype=complex)
    ar = v.conj().T @ a @ v
    br = v.conj().T @ b @ v
    for x, y in ((ar, br), (br, ar)):
        w = eigvalsh(x)
        if w[0] > TOL.support * max(w[-1], 1e-300):
            xh = sqrtm_psd(x)
            xih = powm_psd(x, -0.5)
            inner = sqrtm_psd(as_hermitian(xih @ y @ xih))
            g = as_hermitian(xh @ inner @ xh)
            return v @ g @ v.conj().T
    raise SingularInput("neither operand is invertible on supp(A+B)")


def tensor_power(rho, n):
    """n-fold tensor power with a cap of 4096 on the total dimension."""
    rho = np.asarray(rho, dtype=complex)
    if n < 1:
        raise DomainError("n must be positive")
    if rho.shape[0] ** n > MAX_DIM:
        raise DimensionCap(f"dimension {rho.shape[0]}^{n} exceeds {MAX_DIM}")
    out = np.ones((1, 1), dtype=complex)
    for _ in range(n):
        out = np.kron(out, rho)
    return out


def partial_trace(rho, dims, keep):
    """Reduced operator on the factors listed in ``keep``.

    Parameters
    ----------
    rho : array_like
        Operator on the tensor product of spaces with dimensions ``dims``.
    dims : sequence of int
    keep : int or sequence of int
        Factor indices to keep, in increasing order.
    """
    dims = [int(x) for x in dims]
    keep = [keep] if np.isscalar(keep) else sorted(int(k) for k in keep)
    rho = np.asarray(rho, dtype=complex)
    m = len(dims)
    if rho.shape != (int(np.prod(dims)),) * 2:
        raise DomainError("dims do not match the operator shape")
    t = rho.reshape(dims + dims)
    traced = [i for i in range(m) if i not in keep]
    # trace out from the highest index down so axis numbers stay valid
    cur = m
    for i in reversed(traced):
        t = np.trace(t, axis1=i, axis2=i + cur)
        cur -= 1
    dk = int(np.prod([dims[k] for k in keep])) if keep else 1
    return t.reshape(dk, dk)


def sample_state(kind, dim, seed):
    """Random state of the given ensemble.

    Parameters
    ----------
    kind : {'haar_pure', 'hs_mixed', 'classical_dirichlet'}
    dim : int
        Dimension between 1 and 16.
    seed : int or numpy.random.Generator

    Returns
    -------
    numpy.ndarray
    """
    if not 1 <= dim <= 16:
        raise DomainError("dim must lie in [1, 16]")
    rng = np.random.default_rng(seed)
    if kind == "haar_pure":
        psi = rng.normal(size=dim) + 1j * rng.normal(size=dim)
        psi /= np.linalg.norm(psi)
        return np.outer(psi, psi.conj())
    if kind == "hs_mixed":
        g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        r = g @ g.conj().T
        return as_hermitian(r / np.trace(r).real)
    if kind == "classical_dirichlet":
        return np.diag(rng.dirichlet(np.ones(dim))).astype(complex)
    raise DomainError(f"unknown ensemble {kind!r}")


def pure_state(psi):
    """Density matrix of a (normalised) vector."""
    psi = np.asarray(psi, dtype=complex)
    psi = psi / np.linalg.norm(psi)
    return np.outer(psi, psi.conj())
