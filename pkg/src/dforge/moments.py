"""Moment operators, Haar references, and design diagnostics.

The t-th moment operator of an ensemble is

    M_t = sum_i p_i  U_i^{(x)t} (x) conj(U_i)^{(x)t},

a matrix of dimension ``d**(2t)``. With row-major vectorization it maps
``vec(X)`` to ``vec(sum_i p_i U_i^{(x)t} X U_i^{(x)t dagger})``, so its fixed
points under Haar averaging are the vectorized permutation operators of
the ``t`` tensor copies. The Haar moment operator is the orthogonal
projector onto their span.
"""

from __future__ import annotations

import csv
import itertools
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.sparse.linalg import LinearOperator, svds

from .ensembles import UnitaryEnsemble
from .errors import CapacityError, DomainError
from .limits import check_cap, current_limits
from .linalg import haar_unitary, leading_eigenvalues, spectral_norm

PINV_RCOND = 1e-10
FIXED_OVERLAP_TOL = 1e-6
DENSE_SPECTRUM_DIM = 1024


@dataclass(frozen=True, eq=False)
class MomentOperator:
    """Dense moment matrix with provenance.

    ``method`` is one of ``ensemble-sum``, ``haar-projector``,
    ``haar-montecarlo`` or ``power`` (a matrix power of another operator).
    """

    t: int
    d: int
    matrix: np.ndarray
    method: str
    samples: Optional[int] = None
    meta: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def power(self, k: int) -> "MomentOperator":
        if k < 1:
            raise DomainError("power must be a positive integer")
        return MomentOperator(self.t, self.d, np.linalg.matrix_power(self.matrix, k), "power",
                              meta={**self.meta, "power": k, "base_method": self.method})


def _check_t(t):
    if isinstance(t, bool) or not isinstance(t, (int, np.integer)) or t < 1:
        raise DomainError(f"t must be a positive integer, got {t!r}")
    return int(t)


def _tensor_power_stack(Us: np.ndarray, t: int) -> np.ndarray:
    """``U^{(x)t}`` for a stack ``(N, d, d)``."""
    out = Us
    for _ in range(t - 1):
        N, a, _ = out.shape
        d = Us.shape[1]
        out = np.einsum("nij,nkl->nikjl", out, Us).reshape(N, a * d, a * d)
    return out


def moment_op(E: UnitaryEnsemble, t: int, max_dim: Optional[int] = None) -> MomentOperator:
    """Dense ``sum_i p_i U_i^{(x)t} (x) conj(U_i)^{(x)t}``."""
    t = _check_t(t)
    d = E.dim
    D = d ** (2 * t)
    cap = current_limits().dense_dim if max_dim is None else max_dim
    check_cap(D, cap, "moment operator dimension", "use the matrix-free routines")
    M = np.zeros((D, D), dtype=np.complex128)
    chunk = max(1, 2 ** 23 // (D * D))
    for s in range(0, len(E), chunk):
        A = _tensor_power_stack(E.unitaries[s:s + chunk], t)
        K = np.einsum("nij,nkl->nikjl", A * E.probs[s:s + chunk, None, None], A.conj())
        M += K.reshape(-1, D, D).sum(axis=0)
    return MomentOperator(t, d, M, "ensemble-sum", meta={"ensemble_size": len(E)})


def moment_matvec(E: UnitaryEnsemble, t: int, adjoint: bool = False):
    """Matrix-free ``v -> M_t v`` (or ``M_t^dagger v``)."""
    t = _check_t(t)
    d = E.dim
    D = d ** (2 * t)
    Us = E.unitaries
    if adjoint:
        Us = np.conj(np.swapaxes(Us, 1, 2))
    probs = E.probs

    def apply(v):
        v = np.asarray(v, dtype=np.complex128).reshape((d,) * (2 * t))
        out = np.zeros_like(v)
        for p, U in zip(probs, Us):
            w = v
            Uc = U.conj()
            for ax in range(2 * t):
                G = U if ax < t else Uc
                w = np.moveaxis(np.tensordot(G, w, axes=([1], [ax])), 0, ax)
            out += p * w
        return out.reshape(D)

    return apply


# --------------------------------------------------------------------------
# Haar reference

def permutation_vectors(d: int, t: int) -> np.ndarray:
    """Columns ``vec(P_pi)`` for every ``pi`` in ``S_t`` (lexicographic order).

    ``P_pi`` has entries ``prod_k delta(i_k, j_{pi(k)})``.
    """
    n = d ** t
    perms = list(itertools.permutations(range(t)))
    V = np.zeros((n * n, len(perms)), dtype=np.complex128)
    multi = np.array(list(itertools.product(range(d), repeat=t))).reshape(n, t)
    weights = d ** np.arange(t - 1, -1, -1)
    j = np.arange(n)
    for c, pi in enumerate(perms):
        i = multi[:, list(pi)] @ weights
        V[i * n + j, c] = 1.0
    return V


def cycle_count(perm: Sequence[int]) -> int:
    seen = [False] * len(perm)
    cycles = 0
    for s in range(len(perm)):
        if not seen[s]:
            cycles += 1
            k = s
            while not seen[k]:
                seen[k] = True
                k = perm[k]
    return cycles


def haar_gram(d: int, t: int) -> np.ndarray:
    """``G[pi, sigma] = d ** cycles(pi^{-1} sigma)``, same order as :func:`permutation_vectors`."""
    perms = list(itertools.permutations(range(t)))
    G = np.empty((len(perms), len(perms)))
    for a, pi in enumerate(perms):
        inv = np.argsort(pi)
        for b, sigma in enumerate(perms):
            G[a, b] = float(d) ** cycle_count([inv[s] for s in sigma])
    return G


@dataclass(frozen=True, eq=False)
class HaarFactors:
    """Low-rank form ``P = V G^+ V^dagger`` of the Haar projector."""

    V: np.ndarray
    Gpinv: np.ndarray
    rank: int

    def apply(self, v: np.ndarray) -> np.ndarray:
        """Apply ``P`` to a vector of length ``D`` or to the columns of ``(D, m)``."""
        return self.V @ (self.Gpinv @ (self.V.conj().T @ v))

    def dense(self) -> np.ndarray:
        P = self.V @ self.Gpinv @ self.V.conj().T
        return 0.5 * (P + P.conj().T)


def haar_factors(d: int, t: int) -> HaarFactors:
    t = _check_t(t)
    check_cap(math.factorial(t), 5040, "number of permutations")
    V = permutation_vectors(d, t)
    G = haar_gram(d, t)
    Gpinv = np.linalg.pinv(G, rcond=PINV_RCOND, hermitian=True)
    rank = int(np.linalg.matrix_rank(G, tol=PINV_RCOND * np.abs(G).max(), hermitian=True))
    return HaarFactors(V, Gpinv, rank)


def haar_moment(d: int, t: int, method: str = "projector", samples: int = 100_000,
                rng=None, batch: int = 10_000, max_dim: Optional[int] = None) -> MomentOperator:
    """Haar moment operator.

    ``method="projector"`` gives the exact orthogonal projector;
    ``method="montecarlo"`` averages ``samples`` Haar draws (QR of Ginibre).
    """
    t = _check_t(t)
    if d < 1:
        raise DomainError("d must be positive")
    D = d ** (2 * t)
    cap = current_limits().dense_dim if max_dim is None else max_dim
    check_cap(D, cap, "moment operator dimension")
    if method == "projector":
        F = haar_factors(d, t)
        return MomentOperator(t, d, F.dense(), "haar-projector", meta={"rank": F.rank})
    if method == "montecarlo":
        if samples < 1:
            raise DomainError("samples must be positive")
        rng = np.random.default_rng(rng)
        n = d ** t
        acc = np.zeros((n * n, n * n), dtype=np.complex128)
        done = 0
        while done < samples:
            b = min(batch, samples - done)
            A = _tensor_power_stack(haar_unitary(d, b, rng), t)
            X = A.reshape(b, n * n)
            acc += X.T @ X.conj()
            done += b
        # acc[(a,c),(b,e)] = sum A[a,c] conj(A[b,e]); reorder to [(a,b),(c,e)]
        M = acc.reshape(n, n, n, n).transpose(0, 2, 1, 3).reshape(D, D) / samples
        return MomentOperator(t, d, M, "haar-montecarlo", samples=samples)
    raise DomainError(f"unknown Haar method {method!r}")


def frame_potential_haar(d: int, t: int) -> float:
    """Haar frame potential: the number of independent permutation operators."""
    return float(haar_factors(d, t).rank)


# --------------------------------------------------------------------------
# TPE parameter and spectra

def _as_moment(source, t: int) -> MomentOperator:
    if isinstance(source, MomentOperator):
        if source.t != t:
            raise DomainError(f"moment operator has t={source.t}, asked for t={t}")
        return source
    if isinstance(source, UnitaryEnsemble):
        return moment_op(source, t)
    raise DomainError(f"expected an ensemble or MomentOperator, got {type(source).__name__}")


def tpe_eta(source, t: int, method: str = "auto") -> float:
    """``|| M_t - M_Haar ||`` in spectral norm.

    ``method`` is ``dense``, ``iterative`` or ``auto`` (dense up to dimension
    1024). The iterative path needs an ensemble, not a prebuilt matrix.
    """
    t = _check_t(t)
    d = source.d if isinstance(source, MomentOperator) else source.dim
    D = d ** (2 * t)
    if method == "auto":
        method = "dense" if (D <= DENSE_SPECTRUM_DIM or isinstance(source, MomentOperator)) \
            else "iterative"
    if method == "dense":
        M = _as_moment(source, t)
        P = haar_moment(d, t).matrix
        return spectral_norm(M.matrix - P)
    if method == "iterative":
        if not isinstance(source, UnitaryEnsemble):
            raise DomainError("the iterative path needs an ensemble")
        F = haar_factors(d, t)
        fwd = moment_matvec(source, t)
        bwd = moment_matvec(source, t, adjoint=True)
        op = LinearOperator((D, D), dtype=np.complex128,
                            matvec=lambda v: fwd(v) - F.apply(np.ravel(v)),
                            rmatvec=lambda v: bwd(v) - F.apply(np.ravel(v)))
        rng = np.random.default_rng(0)
        v0 = rng.standard_normal(D) + 1j * rng.standard_normal(D)
        s = svds(op, k=1, which="LM", tol=1e-12, v0=v0, return_singular_vectors=False)
        return float(s[0])
    raise DomainError(f"unknown method {method!r}")


@dataclass(frozen=True)
class LambdaResult:
    """Subdominant eigenvalue modulus with diagnostics.

    ``value`` is the largest eigenvalue modulus of ``M_t`` on the orthogonal
    complement of the Haar fixed space. ``cross_estimate`` is an independent
    figure: the spectral radius of ``M_t - M_Haar`` (dense path) or the
    largest modulus among eigenvectors of ``M_t`` itself whose fixed-space
    component is below ``1e-6`` (iterative path). ``nilpotent_index`` is set
    when ``M_t - M_Haar`` was detected to be nilpotent, in which case
    ``value`` is exactly 0 and ``float_bound`` keeps the rigorous
    floating-point bound ``||R^j||^(1/j)``.
    """

    value: float
    cross_estimate: float
    method: str
    top_eigenvalues: tuple
    nilpotent_index: Optional[int] = None
    float_bound: Optional[float] = None
    defective_warning: bool = False
    max_residual: float = float("nan")

    def __float__(self) -> float:
        return self.value

    def to_dict(self) -> dict:
        return {
            "lambda_sub": self.value, "cross_estimate": self.cross_estimate,
            "method": self.method, "nilpotent_index": self.nilpotent_index,
            "float_bound": self.float_bound, "defective_warning": self.defective_warning,
            "max_residual": self.max_residual,
            "top_eigenvalues": [[float(z.real), float(z.imag)] for z in self.top_eigenvalues],
        }


NEAR_ZERO = 1e-6
NILPOTENT_TOL = 1e-12
MAX_NILPOTENT_INDEX = 8


def _complement_basis(F: HaarFactors) -> np.ndarray:
    Q, s, _ = np.linalg.svd(F.V, full_matrices=True)
    r = int((s > PINV_RCOND * s.max()).sum())
    return Q[:, r:]


def subdominant_lambda(E: UnitaryEnsemble, t: int, method: str = "auto",
                       cross_check: bool = True, k: int = 6) -> LambdaResult:
    """Subdominant eigenvalue ``|lambda|`` of the moment operator.

    ``method`` is ``dense`` (exact compression to the complement of the
    Haar fixed space), ``arnoldi`` (matrix-free, leading eigenvalues of
    ``M_t - M_Haar``) or ``auto`` (dense up to dimension 1024).
    """
    t = _check_t(t)
    d = E.dim
    D = d ** (2 * t)
    if method == "auto":
        method = "dense" if D <= DENSE_SPECTRUM_DIM else "arnoldi"
    F = haar_factors(d, t)
    if method == "dense":
        return _lambda_dense(E, t, F, cross_check)
    if method == "arnoldi":
        return _lambda_arnoldi(E, t, F, cross_check, k)
    raise DomainError(f"unknown method {method!r}")


def _lambda_dense(E, t, F, cross_check):
    M = moment_op(E, t).matrix
    Q = _complement_basis(F)
    Mc = Q.conj().T @ M @ Q
    if Mc.shape[0] == 0:
        return LambdaResult(0.0, 0.0, "dense", (), 0, 0.0)
    w, V = np.linalg.eig(Mc)
    order = np.argsort(-np.abs(w), kind="stable")
    w, V = w[order], V[:, order]
    resid = float(np.linalg.norm(Mc @ V - V * w, axis=0).max())
    cond = np.linalg.cond(V[:, :min(8, V.shape[1])])
    defective = resid > 1e-6 or not np.isfinite(cond) or cond > 1e8
    value = float(np.abs(w[0]))
    cross = float(np.abs(np.linalg.eigvals(M - F.dense())).max()) if cross_check else float("nan")
    nil, bound = None, None
    if value < NEAR_ZERO:
        nil, bound = _nilpotency_dense(Mc)
        if nil is not None:
            value = 0.0
    return LambdaResult(value, cross, "dense", tuple(w[:8]), nil, bound, bool(defective), resid)


def _nilpotency_dense(R):
    P = np.eye(R.shape[0], dtype=np.complex128)
    for j in range(1, MAX_NILPOTENT_INDEX + 1):
        P = P @ R
        nrm = spectral_norm(P)
        if nrm <= NILPOTENT_TOL:
            return j, max(nrm, 0.0) ** (1.0 / j)
    return None, None


def _lambda_arnoldi(E, t, F, cross_check, k):
    D = E.dim ** (2 * t)
    fwd = moment_matvec(E, t)

    def resid_op(v):
        return fwd(v) - F.apply(np.ravel(v))

    spec = leading_eigenvalues(resid_op, D, k=k)
    w = spec.eigenvalues
    value = float(np.abs(w[0]))
    cross = float("nan")
    if cross_check:
        kk = min(F.rank + k, D - 2)
        full = leading_eigenvalues(fwd, D, k=kk, return_vectors=True)
        vecs = full.eigenvectors
        fixed = np.linalg.norm(F.apply(vecs), axis=0) / np.linalg.norm(vecs, axis=0)
        outside = np.abs(full.eigenvalues[fixed <= FIXED_OVERLAP_TOL])
        cross = float(outside.max()) if len(outside) else float("nan")
    nil, bound = None, None
    if value < NEAR_ZERO:
        rng = np.random.default_rng(1)
        probes = rng.standard_normal((3, D)) + 1j * rng.standard_normal((3, D))
        for j in range(1, MAX_NILPOTENT_INDEX + 1):
            probes = np.array([resid_op(p) for p in probes])
            if np.linalg.norm(probes, axis=1).max() <= NILPOTENT_TOL * np.sqrt(D):
                nil, bound = j, None
                value = 0.0
                break
    return LambdaResult(value, cross, "arnoldi", tuple(w), nil, bound)


# --------------------------------------------------------------------------
# frame potential and design epsilon

def frame_potential(E: UnitaryEnsemble, t: int, max_pairs: int = 10 ** 8) -> float:
    """``sum_{ij} p_i p_j |Tr(U_i^dagger U_j)|^(2t)``."""
    t = _check_t(t)
    N = len(E)
    check_cap(N * N, max_pairs, "frame potential pair count")
    flat = E.unitaries.reshape(N, -1)
    total = 0.0
    chunk = max(1, 2 ** 22 // N)
    for s in range(0, N, chunk):
        T = flat[s:s + chunk].conj() @ flat.T
        total += float(E.probs[s:s + chunk] @ (np.abs(T) ** (2 * t)) @ E.probs)
    return total


def realign(M: np.ndarray, d: int, t: int) -> np.ndarray:
    """Choi matrix of the channel whose moment (superoperator) matrix is ``M``.

    ``J[(i,k),(j,l)] = M[(i,j),(k,l)]`` with ``i, j, k, l`` ranging over
    ``d**t`` values.
    """
    n = d ** t
    if M.shape != (n * n, n * n):
        raise DomainError(f"expected a {n * n}x{n * n} moment matrix, got {M.shape}")
    return M.reshape(n, n, n, n).transpose(0, 2, 1, 3).reshape(n * n, n * n)


@dataclass(frozen=True)
class EpsilonResult:
    """Choi-ordering certificate ``(1-eps) J_H <= J_mu <= (1+eps) J_H``.

    ``epsilon`` is ``inf`` when no certificate below 1 exists: either
    ``J_mu`` leaves the support of ``J_H`` (``reason="support"``) or it is
    rank deficient on it (``reason="rank-deficient"``, which forces
    ``eps >= 1``). ``g_min``/``g_max`` are the generalized eigenvalue
    extremes on the support.
    """

    epsilon: float
    g_min: float
    g_max: float
    support_leak: float
    reason: Optional[str] = None

    def __float__(self):
        return self.epsilon

    def to_dict(self):
        eps = self.epsilon if math.isfinite(self.epsilon) else "inf"
        return {"epsilon_star": eps, "g_min": self.g_min, "g_max": self.g_max,
                "support_leak": self.support_leak, "reason": self.reason}


def design_epsilon(source, t: int, power: int = 1, tol: float = 1e-10) -> EpsilonResult:
    """Smallest ``eps`` with ``(1-eps) J_H <= J_mu <= (1+eps) J_H``.

    ``source`` is an ensemble or a :class:`MomentOperator`; ``power`` raises
    the moment operator first, which is the moment operator of the
    ``power``-fold concatenation.
    """
    t = _check_t(t)
    M = _as_moment(source, t)
    if power != 1:
        M = M.power(power)
    d = M.d
    J = realign(M.matrix, d, t)
    J = 0.5 * (J + J.conj().T)
    JH = realign(haar_moment(d, t).matrix, d, t)
    JH = 0.5 * (JH + JH.conj().T)
    h, S = np.linalg.eigh(JH)
    keep = h > tol * h.max()
    S, h = S[:, keep], h[keep]
    inside = S @ (S.conj().T @ J)
    leak = spectral_norm(J - inside) / max(spectral_norm(J), 1e-300)
    Bm = 1.0 / np.sqrt(h)
    A = (S.conj().T @ J @ S) * Bm[:, None] * Bm[None, :]
    g = np.linalg.eigvalsh(0.5 * (A + A.conj().T))
    gmin, gmax = float(g.min()), float(g.max())
    if leak > 1e-8:
        return EpsilonResult(math.inf, gmin, gmax, leak, "support")
    if gmin <= tol:
        return EpsilonResult(math.inf, gmin, gmax, leak, "rank-deficient")
    return EpsilonResult(max(1.0 - gmin, gmax - 1.0), gmin, gmax, leak)


# --------------------------------------------------------------------------
# factorization and decay identities

def embed_pair_moment(Mpair: np.ndarray, first: int, n: int, t: int) -> np.ndarray:
    """Lift a two-qubit moment matrix to ``n`` qubits.

    The ``n``-qubit moment space has ``2t`` copies of ``n`` qubit factors,
    ordered copy-major. ``Mpair`` acts on the ``2t`` copies of qubits
    ``first, first+1`` (1-indexed) in its own copy-major order; every other
    factor is left alone. Built by tensor contraction, independently of
    :func:`dforge.ensembles.embed_pair`.
    """
    nf = 2 * t * n
    D = 2 ** nf
    axes = [c * n + q for c in range(2 * t) for q in (first - 1, first)]
    T = Mpair.reshape((2,) * (4 * t) * 2)
    I = np.eye(D, dtype=np.complex128).reshape((2,) * nf + (D,))
    out = np.tensordot(T, I, axes=(list(range(4 * t, 8 * t)), axes))
    # out axes: the 4t output slots, then the untouched factors in order, then D
    rest = [a for a in range(nf) if a not in axes]
    current = axes + rest
    perm = [current.index(a) for a in range(nf)] + [nf]
    return out.transpose(perm).reshape(D, D)


def block_factorization_check(E: UnitaryEnsemble, n: int, t: int = 1) -> float:
    """Spectral-norm gap between the block moment operator and its factorized form."""
    from .ensembles import block_compose, brickwork_slots

    t = _check_t(t)
    check_cap(2 ** (2 * t * n), current_limits().dense_dim, "block moment dimension")
    left = moment_op(block_compose(E, n), t).matrix
    Mpair = moment_op(E, t).matrix
    odd, even = brickwork_slots(n)
    D = 2 ** (2 * t * n)
    P_odd = np.eye(D, dtype=np.complex128)
    for s in odd:
        P_odd = embed_pair_moment(Mpair, s, n, t) @ P_odd
    P_even = np.eye(D, dtype=np.complex128)
    for s in even:
        P_even = embed_pair_moment(Mpair, s, n, t) @ P_even
    return spectral_norm(left - P_even @ P_odd)


def prop1_decay_check(E: UnitaryEnsemble, t: int, k_max: int, slack: float = 1e-8) -> list:
    """Rows ``{k, norm, eta_k, ok}`` with ``norm = ||M^k - M_H||`` and ``eta_k = eta**k``."""
    t = _check_t(t)
    M = moment_op(E, t).matrix
    P = haar_moment(E.dim, t).matrix
    eta = spectral_norm(M - P)
    rows = []
    Mk = np.eye(M.shape[0], dtype=np.complex128)
    for k in range(1, k_max + 1):
        Mk = M @ Mk
        nrm = spectral_norm(Mk - P)
        rows.append({"k": k, "norm": nrm, "eta_k": eta ** k, "ok": bool(nrm <= eta ** k + slack)})
    return rows


def commutant_dimension(E: UnitaryEnsemble, t: int, tol: float = 1e-8) -> int:
    """Dimension of the joint fixed space of all ``U^{(x)t} (x) conj(U)^{(x)t}``.

    A vector is fixed by every element iff it is fixed by the average
    ``M_t``, iff it lies in the kernel of ``2 - M_t - M_t^dagger``. The Haar
    value is the number of independent permutations; a larger number proves
    the generated group is not dense.
    """
    M = moment_op(E, t).matrix
    H = 0.5 * (M + M.conj().T)
    w = np.linalg.eigvalsh(H)
    return int((w >= 1.0 - tol).sum())


# --------------------------------------------------------------------------
# reports

@dataclass
class DesignReport:
    eta: float
    lambda_sub: float
    frame_potential: float
    frame_potential_haar: float
    epsilon_star: Optional[float]
    exact_design: bool
    metadata: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        eps = self.epsilon_star
        if eps is None:
            eps = "not-computed"
        elif not math.isfinite(eps):
            eps = "inf"
        return {"eta": self.eta, "lambda_sub": self.lambda_sub,
                "frame_potential": self.frame_potential,
                "frame_potential_haar": self.frame_potential_haar,
                "epsilon_star": eps, "exact_design": self.exact_design,
                "metadata": self.metadata}


EXACT_TOL = 1e-10


def design_report(E: UnitaryEnsemble, t: int, epsilon: bool = True,
                  exact_tol: float = EXACT_TOL, method: str = "auto") -> DesignReport:
    """All design figures for one ensemble and order ``t``."""
    lam = subdominant_lambda(E, t, method=method)
    eta = tpe_eta(E, t, method="dense" if lam.method == "dense" else "iterative")
    eps = None
    if epsilon:
        try:
            eps = design_epsilon(E, t).epsilon
        except CapacityError:
            eps = None
    meta = {"t": t, "dim": E.dim, "ensemble_size": len(E), "exact_tol": exact_tol,
            "lambda": lam.to_dict()}
    return DesignReport(eta, lam.value, frame_potential(E, t), frame_potential_haar(E.dim, t),
                        eps, bool(eta <= exact_tol), meta)


def write_eigenvalues_csv(path, eigenvalues) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["index", "real", "imag", "modulus"])
        for i, z in enumerate(eigenvalues):
            w.writerow([i, repr(float(np.real(z))), repr(float(np.imag(z))), repr(float(abs(z)))])


__all__ = [
    "MomentOperator", "moment_op", "moment_matvec", "permutation_vectors", "haar_gram",
    "HaarFactors", "haar_factors", "haar_moment", "frame_potential_haar", "tpe_eta",
    "LambdaResult", "subdominant_lambda", "frame_potential", "realign", "EpsilonResult",
    "design_epsilon", "embed_pair_moment", "block_factorization_check", "prop1_decay_check",
    "commutant_dimension", "DesignReport", "design_report", "write_eigenvalues_csv",
]
