"""Finite random-unitary ensembles and their algebra.

An ensemble is a probability vector paired with a stack of unitaries of
shape ``(N, d, d)``. Concatenation powers, brickwork composition over
qubit pairs, deduplication up to global phase and invertibility
classification all act on this representation.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import DomainError
from .limits import check_cap, current_limits
from .linalg import UNITARY_TOL, phase_normalize_batch

PHASE_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class UnitaryEnsemble:
    """``{p_i, U_i}`` with probabilities summing to one."""

    probs: np.ndarray
    unitaries: np.ndarray

    def __init__(self, probs, unitaries, check: bool = True):
        try:
            p = np.array(probs, dtype=np.float64).reshape(-1)
            U = np.array(unitaries, dtype=np.complex128)
        except (TypeError, ValueError) as exc:
            raise DomainError(f"malformed ensemble data: {exc}") from exc
        if U.ndim == 2:
            U = U[None]
        if U.ndim != 3 or U.shape[1] != U.shape[2]:
            raise DomainError(f"unitaries must have shape (N, d, d), got {U.shape}")
        if len(p) != len(U):
            raise DomainError(f"{len(p)} probabilities for {len(U)} unitaries")
        if len(p) == 0:
            raise DomainError("an ensemble needs at least one element")
        if np.any(p <= 0) or np.any(p > 1 + 1e-12) or not np.all(np.isfinite(p)):
            raise DomainError("probabilities must lie in (0, 1]")
        if abs(p.sum() - 1.0) > 1e-12 * max(1, len(p) ** 0.5):
            raise DomainError(f"probabilities sum to {p.sum()!r}, not 1")
        if check:
            if not np.all(np.isfinite(U)):
                raise DomainError("unitaries have non-finite entries")
            eye = np.eye(U.shape[1])
            err = np.abs(np.einsum("nji,njk->nik", U.conj(), U) - eye).max()
            if err > UNITARY_TOL:
                raise DomainError(f"element fails unitarity check (max |U^dag U - I| = {err:.2e})")
        p.setflags(write=False)
        U.setflags(write=False)
        object.__setattr__(self, "probs", p)
        object.__setattr__(self, "unitaries", U)

    @property
    def dim(self) -> int:
        return self.unitaries.shape[1]

    def __len__(self) -> int:
        return len(self.probs)

    def adjoints(self) -> "UnitaryEnsemble":
        return UnitaryEnsemble(self.probs, np.conj(np.swapaxes(self.unitaries, 1, 2)), check=False)

    def with_adjoints(self) -> "UnitaryEnsemble":
        """Equal mixture of the ensemble and its adjoints."""
        U = np.concatenate([self.unitaries, np.conj(np.swapaxes(self.unitaries, 1, 2))])
        return UnitaryEnsemble(np.concatenate([self.probs, self.probs]) / 2, U, check=False)

    # --- serialization -------------------------------------------------
    def to_dict(self) -> dict:
        entries = []
        for p, U in zip(self.probs, self.unitaries):
            flat = np.empty(2 * U.size)
            flat[0::2] = U.real.reshape(-1)
            flat[1::2] = U.imag.reshape(-1)
            entries.append({"probability": float(p), "unitary": flat.tolist()})
        return {"dim": self.dim, "entries": entries}

    @classmethod
    def from_dict(cls, data: dict) -> "UnitaryEnsemble":
        try:
            d = int(data["dim"])
            probs, mats = [], []
            for e in data["entries"]:
                flat = np.asarray(e["unitary"], dtype=np.float64)
                if flat.size != 2 * d * d:
                    raise DomainError(f"entry has {flat.size} reals, expected {2 * d * d}")
                mats.append((flat[0::2] + 1j * flat[1::2]).reshape(d, d))
                probs.append(float(e["probability"]))
        except (KeyError, TypeError) as exc:
            raise DomainError(f"malformed ensemble record: {exc}") from exc
        return cls(probs, np.array(mats))

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_json(cls, text: str) -> "UnitaryEnsemble":
        return cls.from_dict(json.loads(text))


def uniform(unitaries: Sequence[np.ndarray]) -> UnitaryEnsemble:
    U = np.asarray(unitaries, dtype=np.complex128)
    return UnitaryEnsemble(np.full(len(U), 1.0 / len(U)), U)


def concat_power(E: UnitaryEnsemble, k: int, cap: Optional[int] = None) -> UnitaryEnsemble:
    """All length-``k`` products ``U_{j_k} ... U_{j_1}``.

    Entry index is ``j_1 + N j_2 + ... + N^{k-1} j_k`` (first factor fastest).
    """
    if k < 1:
        raise DomainError("k must be a positive integer")
    cap = current_limits().ensemble_size if cap is None else cap
    check_cap(len(E) ** k, cap, "concatenated ensemble size", "sample products instead")
    U, p = E.unitaries, E.probs
    for _ in range(k - 1):
        U = np.einsum("jab,ibc->jiac", E.unitaries, U).reshape(-1, E.dim, E.dim)
        p = np.outer(E.probs, p).reshape(-1)
    return UnitaryEnsemble(p, U, check=False)


def embed_pair(U: np.ndarray, first: int, n: int) -> np.ndarray:
    """``1 x ... x U x ... x 1`` with the 4x4 ``U`` on qubits ``first, first+1`` (1-indexed)."""
    left = np.eye(2 ** (first - 1))
    right = np.eye(2 ** (n - first - 1))
    return np.kron(np.kron(left, U), right)


def brickwork_slots(n: int) -> tuple:
    """Top qubits of the odd-layer pairs and of the even-layer pairs."""
    odd = tuple(range(1, n, 2))
    even = tuple(range(2, n, 2)) if n > 2 else ()
    return odd, even


def block_compose(E: UnitaryEnsemble, n: int, cap: Optional[int] = None) -> UnitaryEnsemble:
    """One brickwork block of independent draws from a two-qubit ensemble.

    The block is ``(even layer) @ (odd layer)``: the odd layer acts on pairs
    (1,2), (3,4), ... and the even layer on (2,3), (4,5), .... For odd ``n``
    the leftover wire carries the identity. Slots are indexed odd layer first
    (top pair fastest), then the even layer.
    """
    if E.dim != 4:
        raise DomainError("block_compose needs a two-qubit (dim 4) ensemble")
    if n < 2:
        raise DomainError("block_compose needs n >= 2")
    odd, even = brickwork_slots(n)
    slots = odd + even
    cap = current_limits().ensemble_size if cap is None else cap
    check_cap(len(E) ** len(slots), cap, "block ensemble size", "sample blocks instead")
    D = 2 ** n
    check_cap(len(E) ** len(slots) * D * D, 2 ** 27, "block ensemble entries")
    embedded = {s: np.stack([embed_pair(U, s, n) for U in E.unitaries]) for s in set(slots)}
    W = np.eye(D, dtype=np.complex128)[None]
    p = np.ones(1)
    for s in slots:
        W = np.einsum("jab,ibc->jiac", embedded[s], W).reshape(-1, D, D)
        p = np.outer(E.probs, p).reshape(-1)
    return UnitaryEnsemble(p, W, check=False)


def _match_matrix(A: np.ndarray, B: np.ndarray, tol: float) -> np.ndarray:
    """Boolean ``(len(A), len(B))`` table of equality up to global phase.

    Two unitaries are equal up to phase when ``|Tr(A^dag B)| = d``; the test
    aligns the phase by ``arg Tr(A^dag B)`` and checks every entry.
    """
    a = A.reshape(len(A), -1)
    b = B.reshape(len(B), -1)
    out = np.zeros((len(A), len(B)), dtype=bool)
    chunk = max(1, 2 ** 22 // max(1, a.shape[1] * len(B)))
    for s in range(0, len(A), chunk):
        aa = a[s:s + chunk]
        ov = aa.conj() @ b.T
        ph = np.exp(-1j * np.angle(ov))
        diff = np.abs(aa[:, None, :] - ph[:, :, None] * b[None, :, :]).max(axis=2)
        out[s:s + chunk] = diff <= tol
    return out


def dedup_up_to_phase(E: UnitaryEnsemble, tol: float = PHASE_TOL) -> UnitaryEnsemble:
    """Merge elements equal up to a global phase, summing their probabilities.

    The surviving representative of each class is its first member, put in
    phase-normalized form. Representatives keep first-occurrence order.
    """
    groups = phase_classes(E.unitaries, tol)
    reps = phase_normalize_batch(E.unitaries[[g[0] for g in groups]])
    probs = np.array([E.probs[g].sum() for g in groups])
    return UnitaryEnsemble(probs, reps, check=False)


def phase_classes(Us: np.ndarray, tol: float = PHASE_TOL) -> list:
    """Index lists of the classes of ``Us`` under equality up to phase.

    Elements are sorted by a phase-blind scalar key (a fixed positive
    weighting of the entry moduli); only neighbours whose keys lie within
    the tolerance window are compared, and matches are merged with
    union-find.
    """
    N = len(Us)
    flat = Us.reshape(N, -1)
    w = np.linspace(1.0, 2.0, flat.shape[1])
    key = np.abs(flat) @ w
    order = np.argsort(key, kind="stable")
    ks = key[order]
    hi = np.searchsorted(ks, ks + 2 * tol * w.sum(), side="right")
    parent = np.arange(N)

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for pos in range(N):
        if hi[pos] <= pos + 1:
            continue
        i = order[pos]
        cand = order[pos + 1:hi[pos]]
        hits = cand[_match_matrix(Us[[i]], Us[cand], tol)[0]]
        for j in hits:
            ri, rj = find(i), find(j)
            if ri != rj:
                parent[max(ri, rj)] = min(ri, rj)
    classes: dict = {}
    for i in range(N):
        classes.setdefault(find(i), []).append(i)
    return sorted(classes.values(), key=lambda g: g[0])


def same_multiset(E1: UnitaryEnsemble, E2: UnitaryEnsemble, tol: float = PHASE_TOL,
                  prob_tol: float = 1e-12) -> bool:
    """True when both ensembles put equal weight on every phase class."""
    if E1.dim != E2.dim:
        return False
    A = dedup_up_to_phase(E1, tol)
    B = dedup_up_to_phase(E2, tol)
    if len(A) != len(B):
        return False
    M = _match_matrix(A.unitaries, B.unitaries, tol)
    if not (M.sum(axis=1) == 1).all() or not (M.sum(axis=0) == 1).all():
        return False
    j = M.argmax(axis=1)
    return bool(np.abs(A.probs - B.probs[j]).max() <= prob_tol)


@dataclass(frozen=True)
class InvertibilityReport:
    """Result of :func:`classify_invertibility`.

    ``invertible_subset_indices`` index the phase-deduplicated set, which is
    returned alongside as ``distinct``.
    """

    kind: str
    invertible_subset_indices: tuple
    ratio_a: float
    n_distinct: int
    tol: float
    distinct: Optional[UnitaryEnsemble] = None

    def to_dict(self) -> dict:
        return {"class": self.kind, "ratio_a": self.ratio_a, "n_distinct": self.n_distinct,
                "invertible_subset_indices": list(self.invertible_subset_indices),
                "tol": self.tol}


def classify_invertibility(E: UnitaryEnsemble, tol: float = PHASE_TOL) -> InvertibilityReport:
    """Classify the distinct elements by whether their inverse is also present."""
    D = dedup_up_to_phase(E, tol)
    adj = np.conj(np.swapaxes(D.unitaries, 1, 2))
    has_inverse = _match_matrix(adj, D.unitaries, tol).any(axis=1)
    idx = tuple(int(i) for i in np.flatnonzero(has_inverse))
    a = len(idx) / len(D)
    kind = "invertible" if a == 1 else "non-invertible" if a == 0 else "partially-invertible"
    return InvertibilityReport(kind, idx, a, len(D), tol, D)


def sample(source, rng) -> tuple:
    """Draw one ``(index, unitary)`` pair.

    ``source`` is an ensemble or a :class:`~dforge.gadgets.GraphGadget`; for
    a gadget the index is the little-endian outcome integer and the unitary
    is evaluated on demand. ``rng`` is a ``numpy.random.Generator`` or seed.
    """
    idx, Us = sample_many(source, 1, rng)
    return int(idx[0]), Us[0]


def sample_many(source, size: int, rng):
    """Vectorized :func:`sample`: returns ``(indices, unitaries)``."""
    from .gadgets import GraphGadget, outcome_unitary

    rng = np.random.default_rng(rng)
    if isinstance(source, GraphGadget):
        M = source.n_measured
        bits = rng.integers(0, 2, size=(size, M))
        weights = 1 << np.arange(min(M, 62), dtype=np.int64)
        idx = bits[:, :62] @ weights if M else np.zeros(size, dtype=np.int64)
        Us = np.stack([outcome_unitary(source, b) for b in bits])
        return idx, Us
    if isinstance(source, UnitaryEnsemble):
        idx = rng.choice(len(source), size=size, p=source.probs)
        return idx, source.unitaries[idx]
    raise DomainError(f"cannot sample from {type(source).__name__}")


__all__ = [
    "UnitaryEnsemble", "uniform", "concat_power", "embed_pair", "brickwork_slots",
    "block_compose", "dedup_up_to_phase", "phase_classes", "same_multiset",
    "InvertibilityReport", "classify_invertibility", "sample", "sample_many", "PHASE_TOL",
]
