"""Universality screening for finite gate sets.

Three independent signals are combined by :func:`check_universal`:

* the real Lie algebra generated by the Hermitian principal logarithms of
  the gates (``lie_closure_dim``);
* the dimension of the joint fixed space of ``U (x) conj(U)`` and of
  ``U^{(x)2} (x) conj(U)^{(x)2}`` over the set. For a dense subgroup these
  equal 1 and 2 (the Haar values); anything larger proves the generated
  group is not dense, whatever the Lie closure says;
* rationality of eigenvalue arguments, since a set whose elements all
  have finite projective order cannot be dense on its own.

The log-based closure alone is not a proof of density. A principal
logarithm can leave the Lie algebra of the group the gates generate (for
instance when eigenphases wrap around the branch cut, or for elements of a
non-identity component), so a full closure is treated as necessary
evidence only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import scipy.linalg as sla

from .ensembles import UnitaryEnsemble, dedup_up_to_phase
from .errors import DomainError
from .limits import current_limits
from .linalg import principal_log

PAULI_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)

RANK_TOL = 1e-8


@dataclass(frozen=True)
class LieClosureResult:
    closure_dim: int
    traceless_dim: int
    ambient_dim: int
    universal: bool
    iterations: int
    branch_cut_warning: bool = False

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def _hvec(H: np.ndarray) -> np.ndarray:
    """Real coordinates of a Hermitian matrix for the Hilbert-Schmidt inner product."""
    f = H.reshape(-1)
    return np.concatenate([f.real, f.imag])


def _unvec(v: np.ndarray, d: int) -> np.ndarray:
    n = d * d
    return (v[:n] + 1j * v[n:]).reshape(d, d)


class _RealSpan:
    """Orthonormal basis grown by modified Gram-Schmidt with reorthogonalization."""

    def __init__(self, dim: int, tol: float):
        self.Q = np.zeros((0, dim))
        self.tol = tol

    def add(self, v: np.ndarray) -> bool:
        nrm = np.linalg.norm(v)
        if nrm == 0:
            return False
        v = v / nrm
        for _ in range(2):
            for q in self.Q:
                v = v - (q @ v) * q
        r = np.linalg.norm(v)
        if r <= self.tol:
            return False
        self.Q = np.vstack([self.Q, v / r])
        return True


def lie_closure_dim(generators: Sequence[np.ndarray], tol: float = RANK_TOL,
                    max_dim: int = 16) -> LieClosureResult:
    """Dimension of the real Lie algebra generated by ``log(U_i)/i``.

    The span is seeded with the principal logarithms and repeatedly
    extended by ``i[A, B]`` over all basis pairs (in index order) until
    nothing new appears.
    """
    gens = [np.asarray(U, dtype=np.complex128) for U in generators]
    if not gens:
        raise DomainError("need at least one generator")
    d = gens[0].shape[0]
    if d > max_dim:
        raise DomainError(f"dimension {d} above the supported maximum {max_dim}")
    span = _RealSpan(2 * d * d, tol)
    cut = False
    for U in gens:
        H, flag = principal_log(U, return_flag=True)
        cut |= flag
        span.add(_hvec(H))
    iterations = 0
    done_upto = 0
    while True:
        iterations += 1
        mats = [_unvec(q, d) for q in span.Q]
        n_before = len(mats)
        for i in range(n_before):
            for j in range(max(i + 1, done_upto), n_before):
                C = 1j * (mats[i] @ mats[j] - mats[j] @ mats[i])
                span.add(_hvec(0.5 * (C + C.conj().T)))
                if len(span.Q) == d * d:
                    break
        done_upto = n_before
        if len(span.Q) == n_before or len(span.Q) == d * d:
            break
    mats = [_unvec(q, d) for q in span.Q]
    eye = np.eye(d)
    traceless = np.array([_hvec(A - np.trace(A) / d * eye) for A in mats])
    if len(traceless):
        s = np.linalg.svd(traceless, compute_uv=False)
        tdim = int((s > tol).sum())
    else:
        tdim = 0
    return LieClosureResult(len(mats), tdim, d * d, tdim == d * d - 1, iterations, cut)


@dataclass(frozen=True)
class RationalityVerdict:
    angle_over_pi: float
    verdict: str
    p: Optional[int]
    q: Optional[int]
    q_max: int
    tol: float

    @property
    def rational(self) -> bool:
        return self.verdict == "rational"

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def rationality_class(theta: float, q_max: int = 10_000, tol: float = 1e-12) -> RationalityVerdict:
    """Screen ``theta / pi`` for a small-denominator rational value.

    Walks the continued-fraction convergents of ``theta / pi`` and returns
    the first ``p/q`` with ``q <= q_max`` within ``tol``; otherwise the
    verdict is ``irrational-likely``. The test is a heuristic.
    """
    if not math.isfinite(theta):
        raise DomainError("theta must be finite")
    x = float(theta) / math.pi
    h0, h1 = 1, math.floor(x)
    k0, k1 = 0, 1
    rem = x - math.floor(x)
    while True:
        if abs(x - h1 / k1) <= tol:
            return RationalityVerdict(x, "rational", int(h1), int(k1), q_max, tol)
        if rem < 1e-15:
            break
        y = 1.0 / rem
        a = math.floor(y)
        rem = y - a
        h0, h1 = h1, a * h1 + h0
        k0, k1 = k1, a * k1 + k0
        if k1 > q_max:
            break
    return RationalityVerdict(x, "irrational-likely", None, None, q_max, tol)


@dataclass(frozen=True)
class Lemma5Params:
    delta: float
    a: float
    b: float
    c: float
    residual: float
    axis_defined: bool
    printed: dict = field(default_factory=dict)

    def __iter__(self):
        return iter((self.delta, self.a, self.b, self.c, self.residual))


def _hz(theta):
    return np.array([[1, np.exp(1j * theta)], [1, -np.exp(1j * theta)]]) / np.sqrt(2)


def lemma5_params(alpha: float) -> Lemma5Params:
    """Axis-angle form of ``HZ(alpha) HZ(alpha) = e^{i alpha} exp(i delta n.sigma)``.

    ``cos(delta) = cos(alpha/2)**2`` and ``n = (a, b, c)`` with
    ``a = c = -sin(alpha) / (2 s)`` and ``b = (1 - cos(alpha)) / (2 s)``,
    ``s = sqrt(1 - cos(alpha/2)**4)``. ``residual`` is the entrywise max
    error of the reconstruction. ``printed`` records the alternative values
    ``delta = cos(alpha/2)**2`` and ``b = -(1 - cos(alpha)) / (2 s)``, which
    do not reconstruct the product.
    """
    if not math.isfinite(alpha):
        raise DomainError("alpha must be finite")
    c2 = math.cos(alpha / 2) ** 2
    s = math.sqrt(max(0.0, 1.0 - c2 * c2))
    target = _hz(alpha) @ _hz(alpha)
    if s < 1e-12:
        delta, a, b, c = 0.0, 0.0, 0.0, 0.0
        recon = np.exp(1j * alpha) * np.eye(2)
        return Lemma5Params(delta, a, b, c, float(np.abs(target - recon).max()), False,
                            {"delta": c2, "b": 0.0})
    delta = math.acos(max(-1.0, min(1.0, c2)))
    a = c = -math.sin(alpha) / (2 * s)
    b = (1 - math.cos(alpha)) / (2 * s)
    gen = a * PAULI_X + b * PAULI_Y + c * PAULI_Z
    recon = np.exp(1j * alpha) * sla.expm(1j * delta * gen)
    return Lemma5Params(delta, a, b, c, float(np.abs(target - recon).max()), True,
                        {"delta": c2, "b": -b})


@dataclass
class UniversalityReport:
    verdict: str
    closure: LieClosureResult
    n_distinct: int
    commutant_t1: Optional[int]
    commutant_t2: Optional[int]
    commutant_haar_t2: int
    irrational_elements: int
    det_phases: list
    warnings: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"verdict": self.verdict, "closure": self.closure.to_dict(),
                "n_distinct": self.n_distinct, "commutant_t1": self.commutant_t1,
                "commutant_t2": self.commutant_t2,
                "commutant_haar_t2": self.commutant_haar_t2,
                "irrational_elements": self.irrational_elements,
                "det_phases": self.det_phases, "warnings": list(self.warnings)}


def relative_eigenphases(U: np.ndarray) -> np.ndarray:
    """Eigenphase differences ``theta_k - theta_0`` (global-phase invariant)."""
    th = np.angle(np.linalg.eigvals(U))
    return th[1:] - th[0]


def check_universal(E: UnitaryEnsemble, tol: float = 1e-8, q_max: int = 10_000,
                    rat_tol: float = 1e-12, use_commutant: bool = True) -> UniversalityReport:
    """Combined universality verdict for the support of an ensemble.

    ``not-universal`` is returned when the traceless log closure misses
    ``su(d)`` or when a fixed-space (commutant) dimension exceeds its Haar
    value; the second test is a proof of non-density. ``universal`` needs a
    full closure, Haar-sized commutants (when computed) and at least one
    element with an irrational-looking relative eigenphase. Everything else
    is ``inconclusive`` with warnings.
    """
    from .moments import commutant_dimension, frame_potential_haar

    D = dedup_up_to_phase(E, tol)
    d = D.dim
    if d > 16:
        raise DomainError("check_universal supports d <= 16")
    closure = lie_closure_dim(D.unitaries, tol=RANK_TOL)
    warnings = []
    if closure.branch_cut_warning:
        warnings.append("a generator has an eigenvalue on the principal-log branch cut")
    c1 = c2 = None
    haar2 = int(frame_potential_haar(d, 2))
    if use_commutant:
        if d ** 4 <= current_limits().dense_dim:
            c1 = commutant_dimension(D, 1)
            c2 = commutant_dimension(D, 2)
        else:
            warnings.append(f"commutant test skipped: d^4 = {d ** 4} above the dense cap")
    det_phases = []
    irrational = 0
    for U in D.unitaries:
        phi = float(np.angle(np.linalg.det(U)))
        det_phases.append(rationality_class(phi, q_max, rat_tol).to_dict())
        if any(not rationality_class(float(x), q_max, rat_tol).rational
               for x in relative_eigenphases(U)):
            irrational += 1

    if not closure.universal:
        verdict = "not-universal"
    elif c1 is not None and (c1 > 1 or c2 > haar2):
        verdict = "not-universal"
        warnings.append(f"Lie closure is full but the fixed-space dimensions are "
                        f"{c1} (t=1, Haar 1) and {c2} (t=2, Haar {haar2}); "
                        "the generated group is not dense")
    elif irrational == 0:
        verdict = "inconclusive"
        warnings.append("every element has rational relative eigenphases; "
                        "the generated group may be finite")
    elif c1 is None:
        verdict = "inconclusive"
        warnings.append("closure and eigenphase screens pass but no commutant check was run")
    else:
        verdict = "universal"
    return UniversalityReport(verdict, closure, len(D), c1, c2, haar2, irrational,
                              det_phases, warnings)


__all__ = [
    "LieClosureResult", "lie_closure_dim", "RationalityVerdict", "rationality_class",
    "Lemma5Params", "lemma5_params", "UniversalityReport", "check_universal",
    "relative_eigenphases", "PAULI_X", "PAULI_Y", "PAULI_Z",
]
