"""Closed-form depth and concatenation bounds.

Every function returns the smallest integer satisfying its inequality
(a ceiling) and raises :class:`~dforge.errors.DomainError` exactly when
the inequality has no finite solution or an input leaves its domain.

``C`` is the spectral-gap constant of the two-qubit gate set. No numeric
value is known for it; the default 0.9 is a placeholder and every report
labels it ``"unproven constant"``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError

DEFAULT_C = 0.9
C_LABEL = "unproven constant"
LOG_READINGS = ("natural", "log2")


def _open_unit(name, x, closed_right=False):
    if not isinstance(x, (int, float)) or isinstance(x, bool) or not math.isfinite(x):
        raise DomainError(f"{name} must be a finite real, got {x!r}")
    if x <= 0 or (x > 1 if closed_right else x >= 1):
        interval = "(0, 1]" if closed_right else "(0, 1)"
        raise DomainError(f"{name} = {x!r} must lie in {interval}")
    return float(x)


def _pos_int(name, x):
    if isinstance(x, bool) or not isinstance(x, int) or x < 1:
        raise DomainError(f"{name} must be a positive integer, got {x!r}")
    return x


def p_exponent(log: str = "natural") -> float:
    """Exponent of the ``t^(3.1/log 2)`` factor under either reading of ``log``."""
    if log == "natural":
        return 3.1 / math.log(2)
    if log == "log2":
        return 3.1
    raise DomainError(f"log reading must be one of {LOG_READINGS}, got {log!r}")


def _p_log(t: int, log: str) -> float:
    # log P(t), kept separate so that 1 - P(t) survives once P(t) rounds to 1.0
    t = _pos_int("t", t)
    x = 425.0 * math.floor(math.log2(4 * t)) ** 2 * t ** 5 * t ** p_exponent(log)
    return -math.log1p(0.5 / x) / 3.0


def p_of_t(t: int, log: str = "natural") -> float:
    """``(1 + x^-1 / 2)^(-1/3)`` with ``x = 425 floor(log2(4t))^2 t^5 t^(3.1/log 2)``.

    From ``t = 16`` on the value is within one ulp of 1; use :func:`p_gap`
    whenever the distance to 1 matters.
    """
    return math.exp(_p_log(t, log))


def p_gap(t: int, log: str = "natural") -> float:
    """``1 - P(t)`` without cancellation."""
    return -math.expm1(_p_log(t, log))


def gap_eta(C: float, a: float) -> float:
    """Contraction factor ``1 + (C - 1) a`` of one concatenation step."""
    C = _open_unit("C", C)
    a = _open_unit("a", a, closed_right=True)
    return 1.0 + (C - 1.0) * a


def _ceil_k(poly: float, eta: float) -> int:
    if not 0 < eta < 1:
        raise DomainError(f"contraction factor {eta!r} must lie in (0, 1)")
    rate = math.log2(1.0 / eta)
    k = math.ceil(poly / rate)
    # guard against the float quotient landing a hair above an integer
    if k > 1 and (k - 1) * rate >= poly:
        k -= 1
    return max(k, 0)


def theorem1_k(n: int, t: int, C: float = DEFAULT_C, a: float = 1.0, eps_prime: float = 0.01) -> int:
    """Concatenation depth ``k`` for the two-qubit blocks.

    ``k >= (10t + n^2 t - nt + n + log2(1/eps')) / log2(1/(1 + (C-1)a))``.
    """
    n, t = _pos_int("n", n), _pos_int("t", t)
    eps_prime = _open_unit("eps_prime", eps_prime)
    poly = 10 * t + n * n * t - n * t + n + math.log2(1.0 / eps_prime)
    return _ceil_k(poly, gap_eta(C, a))


def corollary2_k(n: int, t: int, C: float = DEFAULT_C, a: float = 1.0, eps_prime: float = 0.01) -> int:
    """Like :func:`theorem1_k` with the polynomial ``8t + (nt + 2t + n^2 t - 2nt + n)``."""
    n, t = _pos_int("n", n), _pos_int("t", t)
    eps_prime = _open_unit("eps_prime", eps_prime)
    poly = 8 * t + (n * t + 2 * t + n * n * t - 2 * n * t + n) + math.log2(1.0 / eps_prime)
    return _ceil_k(poly, gap_eta(C, a))


def theorem1_L(n: int, t: int, eps_prime: float, eps_d: float, log: str = "natural") -> int:
    """Number of blocks ``L >= (4nt + log2(1/eps_d)) / log2(1/(eps' + P(t)))``."""
    n, t = _pos_int("n", n), _pos_int("t", t)
    eps_prime = _open_unit("eps_prime", eps_prime)
    eps_d = _open_unit("eps_d", eps_d)
    gap = p_gap(t, log)
    if eps_prime >= gap:
        raise DomainError(f"eps_prime = {eps_prime!r} must be below 1 - P(t) = {gap!r}")
    # log2(1 / (eps' + P)) = -log2(1 - (gap - eps'))
    rate = -math.log1p(eps_prime - gap) / math.log(2)
    poly = 4 * n * t + math.log2(1.0 / eps_d)
    k = math.ceil(poly / rate)
    if k > 1 and (k - 1) * rate >= poly:
        k -= 1
    return k


def min_qubits(t: int) -> int:
    """Smallest ``n`` for which the block bound applies: ``floor(2.5 log2(4t))``."""
    return math.floor(2.5 * math.log2(4 * _pos_int("t", t)))


@dataclass(frozen=True)
class DepthResult:
    depth: int
    k: int
    L: int
    witness: float

    def __int__(self):
        return self.depth


def depth(n: int, t: int, C: float = DEFAULT_C, a: float = 1.0, eps_prime: float = None,
          eps_d: float = 0.1, log: str = "natural") -> DepthResult:
    """Circuit depth ``D = 2 k L`` and the ratio ``D / (n^3 t^12)``.

    ``eps_prime`` defaults to ``(1 - P(t)) / 2``.
    """
    n, t = _pos_int("n", n), _pos_int("t", t)
    if n < min_qubits(t):
        raise DomainError(f"n = {n} is below the minimum {min_qubits(t)} for t = {t}")
    if eps_prime is None:
        eps_prime = 0.5 * p_gap(t, log)
    k = theorem1_k(n, t, C, a, eps_prime)
    L = theorem1_L(n, t, eps_prime, eps_d, log)
    D = 2 * k * L
    return DepthResult(D, k, L, D / (n ** 3 * t ** 12))


def prop1_k(eta: float, n: int, t: int, eps: float) -> int:
    """Concatenations for an ``eps``-approximate design: ``(4nt + log2(1/eps)) / log2(1/eta)``."""
    eta = _open_unit("eta", eta)
    n, t = _pos_int("n", n), _pos_int("t", t)
    eps = _open_unit("eps", eps)
    return _ceil_k(4 * n * t + math.log2(1.0 / eps), eta)


def conjectureA_k(lam: float, n: int, t: int, eps: float) -> int:
    """:func:`prop1_k` with the subdominant eigenvalue in place of ``eta`` (conjectural)."""
    try:
        return prop1_k(lam, n, t, eps)
    except DomainError as exc:
        raise DomainError(str(exc).replace("eta", "lambda")) from exc


def conjectureA_record(lam: float, n: int, t: int, eps: float) -> dict:
    return {"mode": "conjecture-A", "lambda": lam, "n": n, "t": t, "eps": eps,
            "k": conjectureA_k(lam, n, t, eps), "conjectural": True}


@dataclass(frozen=True)
class SpeedupParams:
    relative_error: float
    fraction: float
    flag: str

    def __iter__(self):
        return iter((self.relative_error, self.fraction))


def speedup_params(mu: float, delta: float, alpha: float, eps_d: float) -> SpeedupParams:
    """Relative error ``mu / (delta alpha (1 - eps_d))`` and the fraction of
    unitaries it applies to, ``(1-delta)(1-alpha)^2 (1-eps_d) / (2(1+eps_d))``.
    """
    mu = _open_unit("mu", mu)
    delta = _open_unit("delta", delta)
    alpha = _open_unit("alpha", alpha)
    eps_d = _open_unit("eps_d", eps_d)
    rel = mu / (delta * alpha * (1.0 - eps_d))
    frac = (1.0 - delta) * (1.0 - alpha) ** 2 * (1.0 - eps_d) / (2.0 * (1.0 + eps_d))
    flag = "relative_error above 1/4" if rel > 0.25 else ""
    return SpeedupParams(rel, frac, flag)


def bounds_report(n: int, t: int, C: float = DEFAULT_C, a: float = 1.0, eps_prime: float = None,
                  eps_d: float = 0.1, log: str = "natural") -> dict:
    """JSON-ready record ``{inputs, k, L, D, P_t, flags}``."""
    res = depth(n, t, C, a, eps_prime, eps_d, log)
    if eps_prime is None:
        eps_prime = 0.5 * p_gap(t, log)
    return {
        "inputs": {"n": n, "t": t, "C": C, "a": a, "eps_prime": eps_prime, "eps_d": eps_d,
                   "log": log},
        "k": res.k, "L": res.L, "D": res.depth, "P_t": p_of_t(t, log),
        "one_minus_P_t": p_gap(t, log),
        "corollary2_k": corollary2_k(n, t, C, a, eps_prime),
        "depth_over_n3_t12": res.witness,
        "flags": {"C": C_LABEL, "C_is_default": C == DEFAULT_C, "log_reading": log},
    }


__all__ = [
    "DEFAULT_C", "C_LABEL", "p_exponent", "p_of_t", "p_gap", "gap_eta", "theorem1_k", "corollary2_k",
    "theorem1_L", "min_qubits", "DepthResult", "depth", "prop1_k", "conjectureA_k",
    "conjectureA_record", "SpeedupParams", "speedup_params", "bounds_report",
]
