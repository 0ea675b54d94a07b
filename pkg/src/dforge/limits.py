"""Size caps used across the package.

Every cap can be overridden per call. ``DFORGE_MAX_DIM`` raises or lowers
the dense-matrix cap (the dimension of the largest dense operator the
library is willing to materialize).
"""

from __future__ import annotations

import os
from dataclasses import dataclass, replace

from .errors import CapacityError


@dataclass(frozen=True)
class Limits:
    kron_dim: int = 2**20
    dense_dim: int = 4096
    matvec_dim: int = 2**20
    enumerate_bits: int = 24
    ensemble_size: int = 10**6
    exact_bits: int = 24
    sampler_rows: int = 20


def current_limits() -> Limits:
    lim = Limits()
    env = os.environ.get("DFORGE_MAX_DIM")
    if env:
        try:
            value = int(env)
        except ValueError as exc:
            raise CapacityError(f"DFORGE_MAX_DIM must be an integer, got {env!r}") from exc
        if value < 1:
            raise CapacityError("DFORGE_MAX_DIM must be positive")
        lim = replace(lim, dense_dim=value)
    return lim


def check_cap(value: int, cap: int, what: str, hint: str = "") -> None:
    if value > cap:
        msg = f"{what} = {value} exceeds cap {cap}"
        if hint:
            msg += f"; {hint}"
        raise CapacityError(msg)
