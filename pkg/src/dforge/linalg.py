"""Dense complex linear algebra kernel.

All matrices are plain ``numpy.ndarray`` objects of dtype ``complex128``.
The helpers here add the conventions the rest of the package relies on:
capacity checks on Kronecker products, a normalized Frobenius norm,
a deterministic eigenvalue ordering, a principal matrix logarithm with a
branch-cut flag, and phase canonicalization of unitaries.

Norm conventions
----------------
``spectral_norm`` is the largest singular value. ``nfrob_norm`` is the
Frobenius norm divided by ``sqrt(N)``, so that the identity has norm 1 and
the norm is multiplicative under Kronecker products.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
import scipy.linalg as sla
from scipy.sparse.linalg import ArpackNoConvergence, LinearOperator, eigs

from .errors import CapacityError, ConvergenceError, DomainError
from .limits import check_cap, current_limits

UNITARY_TOL = 1e-10
BRANCH_CUT_TOL = 1e-8


def as_matrix(A) -> np.ndarray:
    """Return ``A`` as a finite square complex128 array."""
    M = np.asarray(A, dtype=np.complex128)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DomainError(f"expected a square matrix, got shape {M.shape}")
    if M.shape[0] < 1:
        raise DomainError("matrix dimension must be at least 1")
    if not np.all(np.isfinite(M)):
        raise DomainError("matrix has non-finite entries")
    return M


def unitarity_error(U: np.ndarray) -> float:
    """Max-entry deviation of ``U^dagger U`` from the identity."""
    U = np.asarray(U)
    return float(np.abs(U.conj().T @ U - np.eye(U.shape[0])).max())


def is_unitary(U: np.ndarray, tol: float = UNITARY_TOL) -> bool:
    return unitarity_error(U) <= tol


def kron(A, B, max_dim: Optional[int] = None) -> np.ndarray:
    """Kronecker product with a cap on the result dimension.

    Entry ``(i*dB + k, j*dB + l)`` of the result is ``A[i, j] * B[k, l]``.
    """
    A = as_matrix(A)
    B = as_matrix(B)
    cap = current_limits().kron_dim if max_dim is None else max_dim
    check_cap(A.shape[0] * B.shape[0], cap, "kron result dimension")
    return np.kron(A, B)


def kron_all(mats, max_dim: Optional[int] = None) -> np.ndarray:
    """Left-to-right Kronecker product of a non-empty sequence."""
    mats = list(mats)
    if not mats:
        raise DomainError("kron_all needs at least one factor")
    out = as_matrix(mats[0])
    for M in mats[1:]:
        out = kron(out, M, max_dim=max_dim)
    return out


def spectral_norm(A) -> float:
    """Largest singular value."""
    A = np.asarray(A, dtype=np.complex128)
    if A.size == 0:
        return 0.0
    return float(np.linalg.norm(A, 2))


def nfrob_norm(A) -> float:
    """Frobenius norm divided by ``sqrt(dim)``; equals 1 on any unitary."""
    A = as_matrix(A)
    return float(np.linalg.norm(A, "fro") / np.sqrt(A.shape[0]))


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Eigenvalues sorted by modulus (descending), then argument (ascending).

    ``eigenvectors`` holds the matching right eigenvectors as columns when
    they were requested. ``max_residual`` is the largest
    ``||A v - lam v|| / ||A||`` over the returned pairs (``nan`` when no
    vectors were computed).
    """

    eigenvalues: np.ndarray
    eigenvectors: Optional[np.ndarray] = None
    max_residual: float = float("nan")

    def __len__(self) -> int:
        return len(self.eigenvalues)


def spectrum_order(vals: np.ndarray, decimals: int = 12) -> np.ndarray:
    """Index order for (modulus desc, argument asc) with rounded-tie keys."""
    vals = np.asarray(vals)
    mod = np.round(np.abs(vals), decimals)
    arg = np.round(np.angle(vals), decimals)
    return np.lexsort((arg, -mod))


def eig_spectrum(A, vectors: bool = False, max_dim: Optional[int] = None) -> Spectrum:
    """Dense eigendecomposition with the package's ordering convention.

    Raises :class:`CapacityError` above the dense cap; callers then switch
    to :func:`leading_eigenvalues`.
    """
    A = as_matrix(A)
    cap = current_limits().dense_dim if max_dim is None else max_dim
    check_cap(A.shape[0], cap, "dense eigensolve dimension",
              "use the iterative path (leading_eigenvalues)")
    try:
        if vectors:
            w, V = np.linalg.eig(A)
        else:
            w = np.linalg.eigvals(A)
            V = None
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError("dense eigensolver did not converge",
                               {"dim": A.shape[0], "lapack": str(exc)}) from exc
    order = spectrum_order(w)
    w = w[order]
    resid = float("nan")
    if V is not None:
        V = V[:, order]
        scale = max(spectral_norm(A), 1e-300)
        resid = float(np.linalg.norm(A @ V - V * w, axis=0).max() / scale)
        if resid > 1e-8:
            raise ConvergenceError("eigenpair residual above 1e-8 * ||A||",
                                   {"dim": A.shape[0], "max_residual": resid})
    return Spectrum(w, V, resid)


def leading_eigenvalues(matvec: Callable[[np.ndarray], np.ndarray], dim: int, k: int = 6,
                        tol: float = 1e-12, ncv: Optional[int] = None,
                        maxiter: Optional[int] = None, return_vectors: bool = False,
                        seed: int = 0):
    """Largest-modulus eigenvalues of a matrix-free operator.

    Thin wrapper around ARPACK's implicitly restarted Arnoldi method with a
    deterministic starting vector. Returns a :class:`Spectrum`.
    """
    check_cap(dim, current_limits().matvec_dim, "iterative eigensolve dimension")
    if dim <= k + 1:
        raise CapacityError(f"operator of dimension {dim} is too small for k={k}; "
                            "use the dense path")
    op = LinearOperator((dim, dim), matvec=matvec, dtype=np.complex128)
    rng = np.random.default_rng(seed)
    v0 = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    if ncv is None:
        ncv = min(dim, max(2 * k + 1, 40))
    try:
        out = eigs(op, k=k, which="LM", tol=tol, ncv=ncv, v0=v0,
                   maxiter=maxiter, return_eigenvectors=return_vectors)
    except ArpackNoConvergence as exc:
        raise ConvergenceError("Arnoldi iteration did not converge",
                               {"dim": dim, "k": k, "ncv": ncv,
                                "converged": len(exc.eigenvalues)}) from exc
    if return_vectors:
        w, V = out
    else:
        w, V = out, None
    order = spectrum_order(w)
    return Spectrum(w[order], None if V is None else V[:, order])


def principal_log(U, return_flag: bool = False):
    """Hermitian ``H`` with ``U = exp(iH)`` and eigenvalues in ``(-pi, pi]``.

    Eigenvalues within ``1e-8`` of ``-1`` sit on the branch cut; they are
    assigned the argument ``+pi`` and the returned flag is set. Pass
    ``return_flag=True`` to receive ``(H, on_branch_cut)``.
    """
    U = as_matrix(U)
    T, Z = sla.schur(U, output="complex")
    lam = np.diag(T)
    theta = np.angle(lam)
    cut = np.abs(lam + 1.0) <= BRANCH_CUT_TOL
    theta = np.where(cut, np.pi, theta)
    H = (Z * theta) @ Z.conj().T
    H = 0.5 * (H + H.conj().T)
    if return_flag:
        return H, bool(cut.any())
    return H


def phase_normalize(U, tie_tol: float = 1e-9) -> np.ndarray:
    """Rotate the global phase so that the pivot entry is real positive.

    The pivot is the first entry in row-major order whose modulus is within
    ``tie_tol`` (relative) of the largest modulus.
    """
    U = np.asarray(U, dtype=np.complex128)
    flat = U.reshape(-1)
    mod = np.abs(flat)
    top = mod.max()
    if top == 0:
        raise DomainError("cannot phase-normalize the zero matrix")
    pivot = int(np.argmax(mod >= top * (1.0 - tie_tol)))
    return U * np.exp(-1j * np.angle(flat[pivot]))


def phase_normalize_batch(Us: np.ndarray, tie_tol: float = 1e-9) -> np.ndarray:
    """Vectorized :func:`phase_normalize` over a stack of shape ``(N, d, d)``."""
    Us = np.asarray(Us, dtype=np.complex128)
    flat = Us.reshape(Us.shape[0], -1)
    mod = np.abs(flat)
    top = mod.max(axis=1, keepdims=True)
    pivot = np.argmax(mod >= top * (1.0 - tie_tol), axis=1)
    ph = np.angle(flat[np.arange(len(flat)), pivot])
    return Us * np.exp(-1j * ph)[:, None, None]


def haar_unitary(d: int, size: Optional[int] = None, rng=None) -> np.ndarray:
    """Haar-random unitaries via QR of a complex Ginibre matrix.

    The phases of ``diag(R)`` are moved into ``Q`` so the result is exactly
    Haar distributed. Returns shape ``(d, d)`` or ``(size, d, d)``.
    """
    rng = np.random.default_rng(rng)
    n = 1 if size is None else int(size)
    G = (rng.standard_normal((n, d, d)) + 1j * rng.standard_normal((n, d, d))) / np.sqrt(2)
    Q, R = np.linalg.qr(G)
    diag = np.diagonal(R, axis1=1, axis2=2)
    Q = Q * (diag / np.abs(diag))[:, None, :]
    return Q[0] if size is None else Q


__all__ = [
    "Spectrum", "as_matrix", "unitarity_error", "is_unitary", "kron", "kron_all",
    "spectral_norm", "nfrob_norm", "eig_spectrum", "leading_eigenvalues",
    "principal_log", "phase_normalize", "phase_normalize_batch", "haar_unitary",
    "spectrum_order", "UNITARY_TOL",
]
