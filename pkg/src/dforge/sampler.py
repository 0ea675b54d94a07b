"""Output distribution of a measured gadget and anti-concentration estimates.

A run measures every non-output qubit (outcomes ``y``, uniform) and then
the output register in the computational basis (outcome ``x``). The joint
law is ``p(x, y) = 2**-M |<x|U_y|in>|**2``.

Random numbers come from a Philox stream keyed by ``(seed, block)`` where
blocks hold a fixed number of consecutive shots, so a transcript depends
only on the seed and never on how the shots are scheduled.
"""

from __future__ import annotations

import csv
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterator, Optional

import numpy as np

from .ensembles import UnitaryEnsemble
from .errors import DomainError
from .gadgets import GraphGadget, apply_outcomes
from .limits import check_cap, current_limits
from .linalg import haar_unitary

BLOCK = 4096
NORM_TOL = 1e-8
L1_WINDOW = 1.0 / 22.0


def block_rng(seed: int, block: int) -> np.random.Generator:
    """Generator for shot block ``block``; independent of every other block."""
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(block),))
    return np.random.Generator(np.random.Philox(ss))


def _check_seed(seed):
    if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)) or seed < 0:
        raise DomainError(f"seed must be a non-negative integer, got {seed!r}")
    return int(seed)


def _blocks(shots: int):
    return [(b, min(BLOCK, shots - start)) for b, start in enumerate(range(0, shots, BLOCK))]


def _map_blocks(fn, blocks, workers: int):
    if workers <= 1 or len(blocks) == 1:
        return [fn(b) for b in blocks]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, blocks))


def _check_shots(shots):
    if isinstance(shots, bool) or not isinstance(shots, (int, np.integer)) or shots < 1:
        raise DomainError(f"shots must be a positive integer, got {shots!r}")
    return int(shots)


def _input_state(g: GraphGadget, input_state) -> np.ndarray:
    if input_state is None:
        psi = np.zeros(g.dim, dtype=np.complex128)
        psi[0] = 1.0
        return psi
    psi = np.asarray(input_state, dtype=np.complex128).reshape(-1)
    if psi.shape != (g.dim,):
        raise DomainError(f"input state must have length {g.dim}, got {psi.shape[0]}")
    if abs(np.vdot(psi, psi).real - 1.0) > NORM_TOL:
        raise DomainError("input state is not normalized")
    return psi


def _int_to_bits(values: np.ndarray, n_bits: int) -> np.ndarray:
    values = np.asarray(values, dtype=np.int64)
    return ((values[:, None] >> np.arange(n_bits)) & 1).astype(np.uint8)


# --------------------------------------------------------------------------
# exact tables


@dataclass(frozen=True)
class SampleRecord:
    y: tuple
    x: tuple
    weight: Optional[float] = None


@dataclass(frozen=True)
class ExactDistribution:
    """``table[y, x] = p(x, y)``; ``y`` little-endian, ``x`` with row 1 as the top bit."""

    table: np.ndarray
    n_measured: int
    rows: int

    def marginal_x(self) -> np.ndarray:
        return self.table.sum(axis=0)

    def marginal_y(self) -> np.ndarray:
        return self.table.sum(axis=1)

    def records(self) -> Iterator[SampleRecord]:
        for y in range(self.table.shape[0]):
            yb = tuple((y >> k) & 1 for k in range(self.n_measured))
            for x in range(self.table.shape[1]):
                xb = tuple((x >> (self.rows - 1 - r)) & 1 for r in range(self.rows))
                yield SampleRecord(yb, xb, float(self.table[y, x]))

    def to_json(self) -> str:
        return json.dumps({"n_measured": self.n_measured, "rows": self.rows,
                           "table": self.table.tolist()})


def exact_distribution(g: GraphGadget, input_state=None, max_bits: Optional[int] = None,
                       chunk: int = 1 << 14) -> ExactDistribution:
    """Full ``p(x, y)`` table, one batched state evolution per chunk of outcomes."""
    cap = current_limits().exact_bits if max_bits is None else max_bits
    M = g.n_measured
    check_cap(M + g.rows, cap, "measured plus output bits", "use sample_distribution")
    psi0 = _input_state(g, input_state)
    n_y = 2 ** M
    table = np.empty((n_y, g.dim))
    for start in range(0, n_y, chunk):
        ys = np.arange(start, min(n_y, start + chunk))
        out = apply_outcomes(g, _int_to_bits(ys, M), np.broadcast_to(psi0, (len(ys), g.dim)))
        table[start:start + len(ys)] = np.abs(out) ** 2
    table /= n_y
    return ExactDistribution(table, M, g.rows)


# --------------------------------------------------------------------------
# sampling


@dataclass(frozen=True)
class Samples:
    """``shots`` draws: ``y`` bit rows in outcome order and ``x`` integers."""

    y: np.ndarray
    x: np.ndarray
    rows: int
    seed: int

    def __len__(self) -> int:
        return len(self.x)

    def x_bits(self) -> np.ndarray:
        return ((self.x[:, None] >> np.arange(self.rows - 1, -1, -1)) & 1).astype(np.uint8)

    def y_index(self) -> np.ndarray:
        M = self.y.shape[1]
        check_cap(M, 62, "measured qubits", "index only fits 62 bits")
        return self.y.astype(np.int64) @ (1 << np.arange(M, dtype=np.int64))

    def records(self) -> Iterator[SampleRecord]:
        for yb, xb in zip(self.y, self.x_bits()):
            yield SampleRecord(tuple(int(b) for b in yb), tuple(int(b) for b in xb))

    def empirical(self) -> np.ndarray:
        """Frequency table with the same layout as :attr:`ExactDistribution.table`."""
        M = self.y.shape[1]
        check_cap(M + self.rows, current_limits().exact_bits, "measured plus output bits")
        flat = self.y_index() * (1 << self.rows) + self.x
        counts = np.bincount(flat, minlength=2 ** (M + self.rows))
        return counts.reshape(2 ** M, 2 ** self.rows) / len(self)

    def to_csv(self, path) -> None:
        M = self.y.shape[1]
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow([f"y{k}" for k in range(M)] + [f"x{r + 1}" for r in range(self.rows)])
            for yb, xb in zip(self.y, self.x_bits()):
                w.writerow(list(map(int, yb)) + list(map(int, xb)))


def _draw_x(probs: np.ndarray, u: np.ndarray) -> np.ndarray:
    cdf = np.cumsum(probs, axis=1)
    cdf /= cdf[:, -1:]
    x = (cdf < u[:, None]).sum(axis=1)
    return np.minimum(x, probs.shape[1] - 1)


def sample_distribution(g: GraphGadget, shots: int, seed: int, input_state=None,
                        workers: int = 1) -> Samples:
    """Draw ``y`` uniformly, then ``x`` from ``|<x|U_y|in>|**2``.

    Shot blocks may run on ``workers`` threads; the transcript is the same
    for every worker count.
    """
    seed = _check_seed(seed)
    shots = _check_shots(shots)
    check_cap(g.rows, current_limits().sampler_rows, "output rows")
    psi0 = _input_state(g, input_state)
    M = g.n_measured

    def run(block):
        b, size = block
        rng = block_rng(seed, b)
        bits = rng.integers(0, 2, size=(size, M), dtype=np.uint8)
        u = rng.random(size)
        out = apply_outcomes(g, bits, np.broadcast_to(psi0, (size, g.dim)))
        return bits, _draw_x(np.abs(out) ** 2, u)

    parts = _map_blocks(run, _blocks(shots), workers)
    ys = np.concatenate([p[0] for p in parts])
    xs = np.concatenate([p[1] for p in parts]).astype(np.int64)
    return Samples(ys, xs, g.rows, seed)


# --------------------------------------------------------------------------
# anti-concentration


@dataclass(frozen=True)
class AnticoncentrationResult:
    lhs: float
    rhs: float
    sigma: float
    passed: bool
    threshold: float
    shots: int

    def __iter__(self):
        return iter((self.lhs, self.rhs, self.passed))

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def _open_unit(name, x):
    if not 0 < x < 1:
        raise DomainError(f"{name} = {x!r} must lie in (0, 1)")
    return float(x)


def anticoncentration_rhs(alpha: float, eps_d: float) -> float:
    """``(1 - alpha)**2 (1 - eps_d) / (2 (1 + eps_d))``."""
    return (1 - alpha) ** 2 * (1 - eps_d) / (2 * (1 + eps_d))


def haar_tail_probability(d: int, alpha: float, eps_d: float) -> float:
    """``Pr(|<x|U|0>|**2 > alpha (1 - eps_d) / d)`` for Haar ``U``: ``(1 - s/d)**(d-1)``."""
    s = alpha * (1 - eps_d)
    return (1 - s / d) ** (d - 1)


def _block_hits(source, block, seed: int, d: int, threshold: float) -> int:
    b, size = block
    rng = block_rng(seed, b)
    if isinstance(source, GraphGadget):
        bits = rng.integers(0, 2, size=(size, source.n_measured), dtype=np.uint8)
        psi0 = np.zeros(d, dtype=np.complex128)
        psi0[0] = 1.0
        col = apply_outcomes(source, bits, np.broadcast_to(psi0, (size, d)))
    elif isinstance(source, UnitaryEnsemble):
        idx = rng.choice(len(source), size=size, p=source.probs)
        col = source.unitaries[idx, :, 0]
    else:
        col = haar_unitary(d, size=size, rng=rng)[:, :, 0]
    x = rng.integers(0, d, size=size)
    return int((np.abs(col[np.arange(size), x]) ** 2 > threshold).sum())


def anticoncentration_estimate(source, alpha: float, eps_d: float, shots: int, seed: int,
                               n: Optional[int] = None, workers: int = 1) -> AnticoncentrationResult:
    """Empirical ``Pr_{U, x}(|<x|U|0>|**2 > alpha (1 - eps_d) / 2**n)``.

    ``source`` is a :class:`UnitaryEnsemble`, a :class:`GraphGadget`, or the
    string ``"haar"`` (then ``n`` is required). ``passed`` compares the
    estimate with the lower bound ``rhs`` allowing three standard errors.
    """
    alpha = _open_unit("alpha", alpha)
    eps_d = _open_unit("eps_d", eps_d)
    seed = _check_seed(seed)
    shots = _check_shots(shots)
    if isinstance(source, (GraphGadget, UnitaryEnsemble)):
        d = source.dim
    elif isinstance(source, str) and source == "haar":
        if n is None or n < 1:
            raise DomainError("a Haar source needs a positive qubit count n")
        d = 2 ** n
    else:
        raise DomainError(f"unsupported source {source!r}")
    if d & (d - 1):
        raise DomainError(f"dimension {d} is not a power of two")
    threshold = alpha * (1 - eps_d) / d
    hits = sum(_map_blocks(lambda blk: _block_hits(source, blk, seed, d, threshold),
                           _blocks(shots), workers))
    lhs = hits / shots
    sigma = float(np.sqrt(lhs * (1 - lhs) / shots))
    rhs = anticoncentration_rhs(alpha, eps_d)
    return AnticoncentrationResult(lhs, rhs, sigma, bool(lhs >= rhs - 3 * sigma), threshold,
                                   shots)


# --------------------------------------------------------------------------
# distances and exports


@dataclass(frozen=True)
class Distance:
    tv: float
    l1: float

    def __float__(self):
        return self.tv


def _as_distribution(P, name):
    if isinstance(P, dict):
        return P
    arr = np.asarray(P, dtype=float).reshape(-1)
    if np.any(arr < -NORM_TOL):
        raise DomainError(f"{name} has negative entries")
    return arr


def tv_distance(P, Q) -> Distance:
    """Total variation ``(1/2) sum |P - Q|`` and the plain ``l1`` sum.

    Arrays are padded with zeros to a common length; dicts are compared on
    the union of their keys.
    """
    P, Q = _as_distribution(P, "P"), _as_distribution(Q, "Q")
    if isinstance(P, dict) or isinstance(Q, dict):
        if not (isinstance(P, dict) and isinstance(Q, dict)):
            raise DomainError("compare two mappings or two arrays, not one of each")
        keys = sorted(set(P) | set(Q), key=repr)
        P = np.array([float(P.get(k, 0.0)) for k in keys])
        Q = np.array([float(Q.get(k, 0.0)) for k in keys])
    n = max(len(P), len(Q))
    P = np.pad(P, (0, n - len(P)))
    Q = np.pad(Q, (0, n - len(Q)))
    for name, arr in (("P", P), ("Q", Q)):
        if abs(arr.sum() - 1.0) > NORM_TOL:
            raise DomainError(f"{name} sums to {arr.sum()!r}, not 1")
    l1 = float(np.abs(P - Q).sum())
    return Distance(0.5 * l1, l1)


def porter_thomas_histogram(probs, d: int, bins: int = 40, s_max: float = 8.0) -> dict:
    """Histogram of ``s = d |<x|U|0>|**2`` next to the Haar density of ``s``.

    The finite-``d`` density is ``(1 - 1/d)(1 - s/d)**(d-2)``; its large-``d``
    limit ``exp(-s)`` is reported alongside.
    """
    s = np.asarray(probs, dtype=float).reshape(-1) * d
    edges = np.linspace(0.0, s_max, bins + 1)
    density, _ = np.histogram(s, bins=edges, density=False)
    density = density / (len(s) * np.diff(edges))
    mid = 0.5 * (edges[1:] + edges[:-1])
    finite = np.where(mid < d, (1 - 1 / d) * np.clip(1 - mid / d, 0, None) ** (d - 2), 0.0)
    return {"d": d, "edges": edges.tolist(), "density": density.tolist(),
            "haar_density": finite.tolist(), "exponential": np.exp(-mid).tolist(),
            "overflow": int((s >= s_max).sum())}


__all__ = [
    "SampleRecord", "ExactDistribution", "exact_distribution", "Samples", "sample_distribution",
    "AnticoncentrationResult", "anticoncentration_estimate", "anticoncentration_rhs",
    "haar_tail_probability", "Distance", "tv_distance", "porter_thomas_histogram",
    "block_rng", "L1_WINDOW",
]
