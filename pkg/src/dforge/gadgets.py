"""Cluster-state gadgets measured non-adaptively in the XY plane.

A gadget is an ``rows x columns`` patch of a cluster state. Every row is a
wire joined by horizontal CZ edges; extra CZ edges join neighbouring rows
inside a column. All columns except the last are measured, the last one is
the output register. Measuring the site in row ``r``, column ``j`` at angle
``theta`` with outcome ``m`` applies ``H Z(theta + m pi)`` to logical wire
``r``, where ``Z(theta) = diag(1, exp(i theta))``. The outcome string
therefore selects one unitary

    U_m = E_c M_{c-1} E_{c-1} ... M_1 E_1,

with ``E_j`` the product of the vertical CZs in column ``j`` and ``M_j`` the
tensor product of the single-qubit factors of column ``j``. Row 1 is the
most significant tensor factor.

Conventions
-----------
* Outcome bits are ordered column-major over the measured sites (column 1
  rows 1..n, then column 2, ...). An outcome string is read as a
  little-endian integer, so bit 0 is the least significant.
* ``convention="circuit"`` (default) uses ``HZ(theta + m pi)`` directly.
  ``convention="measurement"`` treats ``theta`` as the physical angle of the
  basis ``(|0> +- exp(i theta)|1>)/sqrt(2)``, whose branch operator is
  ``HZ(-theta + m pi)``.
* Skip sites are measured-column positions with no qubit. The wire passes
  through unchanged and a vertical edge attached there acts on the next
  qubit present further along the row. Tiled layouts use them for rows that
  sit out a layer.
"""

from __future__ import annotations

import ast
import math
import operator
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from .errors import DomainError
from .limits import check_cap, current_limits

HADAMARD = np.array([[1, 1], [1, -1]], dtype=np.complex128) / np.sqrt(2)
CZ = np.diag([1, 1, 1, -1]).astype(np.complex128)
CONVENTIONS = ("circuit", "measurement")


def z_phase(theta: float) -> np.ndarray:
    return np.diag([1.0, np.exp(1j * theta)]).astype(np.complex128)


def hz(theta: float) -> np.ndarray:
    """``H @ Z(theta)``."""
    return HADAMARD @ z_phase(theta)


# --------------------------------------------------------------------------
# angle literals

_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
           ast.Div: operator.truediv, ast.Pow: operator.pow}
_UNOPS = {ast.UAdd: operator.pos, ast.USub: operator.neg}
_FUNCS = {"sqrt": math.sqrt, "acos": math.acos, "asin": math.asin, "atan": math.atan,
          "cos": math.cos, "sin": math.sin, "tan": math.tan}
_NAMES = {"pi": math.pi}


def parse_angle(value) -> float:
    """Turn a number or a small arithmetic literal such as ``"pi/6"`` into radians.

    Only numbers, ``pi``, the four arithmetic operators, ``**`` and the
    functions sqrt/acos/asin/atan/cos/sin/tan are accepted.
    """
    if isinstance(value, bool):
        raise DomainError(f"angle must be numeric, got {value!r}")
    if isinstance(value, (int, float, np.integer, np.floating)):
        out = float(value)
    elif isinstance(value, str):
        try:
            tree = ast.parse(value.strip(), mode="eval")
            out = float(_eval_node(tree.body))
        except (SyntaxError, ValueError, ZeroDivisionError, TypeError) as exc:
            raise DomainError(f"cannot parse angle literal {value!r}: {exc}") from exc
    else:
        raise DomainError(f"angle must be a number or string, got {type(value).__name__}")
    if not math.isfinite(out):
        raise DomainError(f"angle {value!r} is not finite")
    return out


def _eval_node(node):
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
        return node.value
    if isinstance(node, ast.Name) and node.id in _NAMES:
        return _NAMES[node.id]
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        return _BINOPS[type(node.op)](_eval_node(node.left), _eval_node(node.right))
    if isinstance(node, ast.UnaryOp) and type(node.op) in _UNOPS:
        return _UNOPS[type(node.op)](_eval_node(node.operand))
    if (isinstance(node, ast.Call) and isinstance(node.func, ast.Name)
            and node.func.id in _FUNCS and len(node.args) == 1 and not node.keywords):
        return _FUNCS[node.func.id](_eval_node(node.args[0]))
    raise ValueError(f"unsupported expression element {ast.dump(node)}")


# --------------------------------------------------------------------------
# the gadget type

@dataclass(frozen=True, eq=False)
class GraphGadget:
    """Validated cluster-state gadget.

    ``angles`` has shape ``(rows, columns - 1)``; ``angles[r, j]`` belongs to
    row ``r + 1`` and column ``j + 1``. Edges and skip sites use 1-indexed
    ``(column, row)`` pairs; an edge ``(j, r)`` joins rows ``r`` and ``r + 1``.
    """

    rows: int
    columns: int
    angles: np.ndarray
    vertical_edges: tuple = ()
    skip_sites: frozenset = field(default_factory=frozenset)
    convention: str = "circuit"

    @property
    def dim(self) -> int:
        return 2 ** self.rows

    @property
    def measured_sites(self) -> tuple:
        """Measured ``(column, row)`` sites in outcome-bit order."""
        return tuple((j, r) for j in range(1, self.columns)
                     for r in range(1, self.rows + 1) if (j, r) not in self.skip_sites)

    @property
    def n_measured(self) -> int:
        return self.rows * (self.columns - 1) - len(self.skip_sites)

    def column_sites(self, j: int) -> list:
        """Rows measured in column ``j`` (1-indexed)."""
        return [r for r in range(1, self.rows + 1) if (j, r) not in self.skip_sites]

    def column_edges(self, j: int) -> list:
        return [r for (c, r) in self.vertical_edges if c == j]

    def signed_angle(self, r: int, j: int) -> float:
        theta = float(self.angles[r - 1, j - 1])
        return -theta if self.convention == "measurement" else theta

    def to_config(self) -> dict:
        """Explicit GadgetConfig mapping (JSON/YAML friendly)."""
        cfg = {
            "rows": self.rows,
            "columns": self.columns,
            "angles": [[float(a) for a in row] for row in self.angles],
            "vertical_edges": [[c, r] for (c, r) in self.vertical_edges],
        }
        if self.skip_sites:
            cfg["skip_sites"] = [[c, r] for (c, r) in sorted(self.skip_sites)]
        if self.convention != "circuit":
            cfg["convention"] = self.convention
        return cfg


GADGET_KEYS = {"rows", "columns", "angles", "vertical_edges", "skip_sites",
               "convention", "preset", "params", "seed", "seed_params"}


def build_gadget(config: Mapping) -> GraphGadget:
    """Validate a GadgetConfig mapping and return a :class:`GraphGadget`.

    A mapping with a ``preset`` key is expanded through :func:`preset`
    first; ``convention`` may accompany either form.
    """
    if isinstance(config, GraphGadget):
        return config
    if not isinstance(config, Mapping):
        raise DomainError("gadget config must be a mapping")
    unknown = set(config) - GADGET_KEYS
    if unknown:
        raise DomainError(f"unknown gadget config keys: {sorted(unknown)}")
    convention = config.get("convention", "circuit")
    if "preset" in config:
        extra = set(config) - {"preset", "params", "seed", "seed_params", "convention"}
        if extra:
            raise DomainError(f"preset configs cannot also set {sorted(extra)}")
        kwargs = {}
        if "seed" in config:
            kwargs["seed"] = config["seed"]
        if "seed_params" in config:
            kwargs["seed_params"] = config["seed_params"]
        expanded = preset(config["preset"], config.get("params", []), **kwargs)
        expanded["convention"] = convention
        return build_gadget(expanded)

    for key in ("rows", "columns", "angles"):
        if key not in config:
            raise DomainError(f"gadget config missing key {key!r}")
    rows, columns = config["rows"], config["columns"]
    if not isinstance(rows, (int, np.integer)) or isinstance(rows, bool) or rows < 1:
        raise DomainError(f"rows must be a positive integer, got {rows!r}")
    if not isinstance(columns, (int, np.integer)) or isinstance(columns, bool) or columns < 1:
        raise DomainError(f"columns must be a positive integer, got {columns!r}")
    rows, columns = int(rows), int(columns)
    raw = config["angles"]
    if columns == 1:
        if raw not in ([], None) and any(len(r) for r in raw):
            raise DomainError("a single-column gadget carries no angles")
        grid = np.zeros((rows, 0))
    else:
        if not isinstance(raw, Sequence) or len(raw) != rows:
            raise DomainError(f"angles must have {rows} rows")
        grid = np.zeros((rows, columns - 1))
        for r, row in enumerate(raw):
            if not isinstance(row, Sequence) or isinstance(row, str) or len(row) != columns - 1:
                raise DomainError(f"angle row {r + 1} must have {columns - 1} entries")
            for j, a in enumerate(row):
                grid[r, j] = parse_angle(a)
    grid = np.mod(grid, 2 * np.pi)
    grid.setflags(write=False)

    edges = []
    for e in config.get("vertical_edges", []) or []:
        c, r = _pair(e, "vertical edge")
        if not (1 <= c <= columns and 1 <= r <= rows - 1):
            raise DomainError(f"vertical edge {(c, r)} out of range for "
                              f"{rows} rows x {columns} columns")
        edges.append((c, r))
    if len(set(edges)) != len(edges):
        raise DomainError("duplicate vertical edges")
    skips = set()
    for s in config.get("skip_sites", []) or []:
        c, r = _pair(s, "skip site")
        if not (1 <= c <= columns - 1 and 1 <= r <= rows):
            raise DomainError(f"skip site {(c, r)} must lie in a measured column")
        skips.add((c, r))
    if convention not in CONVENTIONS:
        raise DomainError(f"convention must be one of {CONVENTIONS}, got {convention!r}")
    return GraphGadget(rows, columns, grid, tuple(sorted(edges)), frozenset(skips), convention)


def _pair(obj, what):
    if isinstance(obj, str) or not isinstance(obj, Sequence) or len(obj) != 2:
        raise DomainError(f"{what} must be a [column, row] pair, got {obj!r}")
    c, r = obj
    if not all(isinstance(v, (int, np.integer)) and not isinstance(v, bool) for v in (c, r)):
        raise DomainError(f"{what} coordinates must be integers, got {obj!r}")
    return int(c), int(r)


# --------------------------------------------------------------------------
# evaluation

def cz_diagonal(rows: int, pairs: Iterable[int]) -> np.ndarray:
    """Diagonal of the product of CZ(r, r+1) over ``pairs`` (row 1 = MSB)."""
    idx = np.arange(2 ** rows)
    sign = np.ones(2 ** rows)
    for r in pairs:
        b1 = (idx >> (rows - r)) & 1
        b2 = (idx >> (rows - r - 1)) & 1
        sign = sign * np.where(b1 & b2, -1.0, 1.0)
    return sign.astype(np.complex128)


def _column_factor(g: GraphGadget, j: int, bits: Sequence[int]) -> np.ndarray:
    """Tensor product of the single-qubit branch operators of column ``j``."""
    sites = g.column_sites(j)
    it = iter(bits)
    out = np.ones((1, 1), dtype=np.complex128)
    for r in range(1, g.rows + 1):
        if r in sites:
            out = np.kron(out, hz(g.signed_angle(r, j) + next(it) * np.pi))
        else:
            out = np.kron(out, np.eye(2))
    return out


def _bits_from(m, n_bits: int) -> list:
    if isinstance(m, (int, np.integer)) and not isinstance(m, bool):
        if not 0 <= int(m) < 2 ** n_bits:
            raise DomainError(f"outcome index {m} out of range for {n_bits} bits")
        return [(int(m) >> k) & 1 for k in range(n_bits)]
    bits = [int(b) for b in m]
    if len(bits) != n_bits:
        raise DomainError(f"outcome string has {len(bits)} bits, gadget measures {n_bits}")
    if any(b not in (0, 1) for b in bits):
        raise DomainError("outcome bits must be 0 or 1")
    return bits


def outcome_unitary(g: GraphGadget, m) -> np.ndarray:
    """Unitary applied to the output register for outcome string ``m``.

    ``m`` is a bit sequence in outcome order or its little-endian integer.
    """
    bits = _bits_from(m, g.n_measured)
    U = np.diag(cz_diagonal(g.rows, g.column_edges(1)))
    pos = 0
    for j in range(1, g.columns):
        k = len(g.column_sites(j))
        U = _column_factor(g, j, bits[pos:pos + k]) @ U
        pos += k
        U = cz_diagonal(g.rows, g.column_edges(j + 1))[:, None] * U
    return U


def enumerate_unitaries(g: GraphGadget, max_bits: Optional[int] = None) -> np.ndarray:
    """All ``2**M`` outcome unitaries, indexed by the little-endian outcome integer."""
    lim = current_limits()
    cap = lim.enumerate_bits if max_bits is None else max_bits
    M = g.n_measured
    check_cap(M, cap, "measured qubits", "sample outcomes instead of enumerating")
    D = g.dim
    check_cap(2 ** M * D * D, 2 ** 27, "enumerated matrix entries",
              "sample outcomes instead of enumerating")
    U = np.diag(cz_diagonal(g.rows, g.column_edges(1)))[None]
    for j in range(1, g.columns):
        k = len(g.column_sites(j))
        after = cz_diagonal(g.rows, g.column_edges(j + 1))
        layers = np.stack([after[:, None] * _column_factor(g, j, [(x >> b) & 1 for b in range(k)])
                           for x in range(2 ** k)])
        # new index = previous index + 2**(bits so far) * layer index
        U = np.einsum("lab,pbc->lpac", layers, U).reshape(-1, D, D)
    return U


def enumerate_ensemble(g: GraphGadget, max_bits: Optional[int] = None):
    """Uniform ensemble over all outcome unitaries."""
    from .ensembles import UnitaryEnsemble

    U = enumerate_unitaries(g, max_bits)
    return UnitaryEnsemble(np.full(len(U), 1.0 / len(U)), U, check=False)


def apply_outcomes(g: GraphGadget, bits: np.ndarray, states: np.ndarray) -> np.ndarray:
    """Evolve a batch of states, each under its own outcome string.

    ``bits`` has shape ``(S, M)`` and ``states`` shape ``(S, 2**rows)``.
    Nothing of size ``2**M`` is ever built.
    """
    bits = np.asarray(bits, dtype=np.int64)
    psi = np.array(states, dtype=np.complex128)
    S, n = psi.shape[0], g.rows
    if bits.shape != (S, g.n_measured):
        raise DomainError(f"bits must have shape {(S, g.n_measured)}, got {bits.shape}")
    psi = psi * cz_diagonal(n, g.column_edges(1))
    pos = 0
    for j in range(1, g.columns):
        t = psi.reshape((S,) + (2,) * n)
        for r in g.column_sites(j):
            theta = g.signed_angle(r, j) + np.pi * bits[:, pos]
            pos += 1
            # H Z(theta) applied to axis r, one gate per shot
            t = np.moveaxis(t, r, 1)
            a0, a1 = t[:, 0], t[:, 1] * np.exp(1j * theta).reshape((S,) + (1,) * (n - 1))
            t = np.stack([a0 + a1, a0 - a1], axis=1) / np.sqrt(2)
            t = np.moveaxis(t, 1, r)
        psi = t.reshape(S, -1) * cz_diagonal(n, g.column_edges(j + 1))
    return psi


# --------------------------------------------------------------------------
# presets and tiling

# Bit positions of the reference labels m1..m8 for the fig3 gadget, given
# as (column, row). m1..m3 are the bottom row of columns 1-3, m4..m6 the top
# row, m7/m8 the bottom/top of column 4.
FIG3_BIT_MAP = {1: (1, 2), 2: (2, 2), 3: (3, 2), 4: (1, 1),
                5: (2, 1), 6: (3, 1), 7: (4, 2), 8: (4, 1)}

PRESETS = ("fig1", "fig3", "cgen", "linear", "kgb", "block", "lblock")
_SEED_ARITY = {"fig1": 2, "fig3": 2}


def fig3_outcome_index(m: Sequence[int]) -> int:
    """Outcome integer of the fig3 gadget for reference labels ``(m1, ..., m8)``."""
    if len(m) != 8:
        raise DomainError("fig3 reference labels need 8 bits")
    g_sites = [(j, r) for j in range(1, 5) for r in (1, 2)]
    idx = 0
    for label, bit in enumerate(m, start=1):
        idx |= int(bit) << g_sites.index(FIG3_BIT_MAP[label])
    return idx


def _angles(params, n, name):
    if len(params) != n:
        raise DomainError(f"preset {name!r} takes {n} angle parameters, got {len(params)}")
    return [parse_angle(p) for p in params]


def _int_param(v, name, what, minimum=1):
    if isinstance(v, bool) or not isinstance(v, (int, np.integer)) or int(v) < minimum:
        raise DomainError(f"preset {name!r}: {what} must be an integer >= {minimum}, got {v!r}")
    return int(v)


def _seed_config(seed: str, seed_params) -> dict:
    if seed not in _SEED_ARITY:
        raise DomainError(f"tiling seed must be one of {sorted(_SEED_ARITY)}, got {seed!r}")
    return preset(seed, seed_params)


def preset(name: str, params: Sequence = (), *, seed: str = "fig3",
           seed_params: Optional[Sequence] = None) -> dict:
    """Explicit GadgetConfig for a named layout.

    ===========  =========================================================
    ``fig1``     ``[alpha, beta]``: 2x2 cluster, edge in the output column
    ``fig3``     ``[alpha, beta]``: 2x5 partially-invertible gadget
    ``cgen``     ``[a_1, ..., a_n]``: n rows x 2 columns, edges (2, r)
    ``linear``   ``[a_1, ..., a_k]``: one row, k measured columns
    ``kgb``      ``[k, *seed angles]``: k-fold horizontal tiling of a seed
    ``block``    ``[n, k, *seed angles]``: one brickwork block over n rows
    ``lblock``   ``[n, k, L, *seed angles]``: L brickwork blocks
    ===========  =========================================================

    Tiled presets take the seed gadget from ``seed`` (``"fig3"`` or
    ``"fig1"``); its angles are the trailing params, or ``seed_params``.
    """
    params = list(params)
    if name == "fig1":
        a, b = _angles(params, 2, name)
        return {"rows": 2, "columns": 2, "angles": [[a], [b]], "vertical_edges": [[2, 1]]}
    if name == "fig3":
        a, b = _angles(params, 2, name)
        return {"rows": 2, "columns": 5,
                "angles": [[0.0, a, 0.0, b], [a, 0.0, a, b]],
                "vertical_edges": [[4, 1]]}
    if name == "cgen":
        if not params:
            raise DomainError("preset 'cgen' needs at least one angle")
        a = _angles(params, len(params), name)
        n = len(a)
        return {"rows": n, "columns": 2, "angles": [[x] for x in a],
                "vertical_edges": [[2, r] for r in range(1, n)]}
    if name == "linear":
        if not params:
            raise DomainError("preset 'linear' needs at least one angle")
        a = _angles(params, len(params), name)
        return {"rows": 1, "columns": len(a) + 1, "angles": [a], "vertical_edges": []}
    if name in ("kgb", "block", "lblock"):
        n_int = {"kgb": 1, "block": 2, "lblock": 3}[name]
        if len(params) < n_int:
            raise DomainError(f"preset {name!r} needs {n_int} integer parameters")
        ints, rest = params[:n_int], params[n_int:]
        if seed_params is not None:
            if rest:
                raise DomainError("give seed angles either in params or in seed_params")
            rest = list(seed_params)
        if seed not in _SEED_ARITY:
            raise DomainError(f"tiling seed must be one of {sorted(_SEED_ARITY)}, got {seed!r}")
        if len(rest) != _SEED_ARITY[seed]:
            raise DomainError(f"preset {name!r} with seed {seed!r} takes "
                              f"{_SEED_ARITY[seed]} seed angles, got {len(rest)}")
        tile = build_gadget(_seed_config(seed, rest))
        if name == "kgb":
            k = _int_param(ints[0], name, "k")
            return tile_config(2, [(tile, 1, i * (tile.columns - 1)) for i in range(k)])
        n = _int_param(ints[0], name, "n", 2)
        k = _int_param(ints[1], name, "k")
        L = _int_param(ints[2], name, "L") if name == "lblock" else 1
        return brickwork_config(tile, n, k, L)
    raise DomainError(f"unknown preset {name!r}; choose from {PRESETS}")


def tile_config(rows: int, placements) -> dict:
    """Merge 2-row tiles into one gadget config.

    ``placements`` lists ``(tile, top_row, column_offset)``. A tile's output
    column may coincide with the next tile's input column; vertical edges
    landing on the same spot cancel (CZ squared is the identity). Measured
    sites not covered by any tile become skip sites.
    """
    columns = max(off + t.columns for t, _, off in placements)
    angles = np.zeros((rows, columns - 1))
    covered = set()
    edges = set()
    for t, top, off in placements:
        if t.rows != 2 or t.skip_sites:
            raise DomainError("tiles must be plain 2-row gadgets")
        if not 1 <= top < rows:
            raise DomainError(f"tile top row {top} out of range")
        for dr in (0, 1):
            for j in range(1, t.columns):
                site = (off + j, top + dr)
                if site in covered:
                    raise DomainError(f"tiles overlap at measured site {site}")
                covered.add(site)
                angles[top + dr - 1, off + j - 1] = t.angles[dr, j - 1]
        for (c, _r) in t.vertical_edges:
            edges ^= {(off + c, top)}
    skips = [[j, r] for j in range(1, columns) for r in range(1, rows + 1)
             if (j, r) not in covered]
    cfg = {"rows": rows, "columns": columns, "angles": angles.tolist(),
           "vertical_edges": [list(e) for e in sorted(edges)]}
    if skips:
        cfg["skip_sites"] = skips
    return cfg


def brickwork_config(seed: GraphGadget, n: int, k: int, L: int) -> dict:
    """``L`` brickwork blocks of ``k``-fold seed tiles over ``n`` rows.

    Each block is an odd layer on row pairs (1,2), (3,4), ... followed by an
    even layer on (2,3), (4,5), .... Layers and blocks share their boundary
    columns. With ``n = 2`` the even layer is empty and a block is a single
    tile.
    """
    w = k * (seed.columns - 1)          # measured columns per tile
    placements = []
    off = 0
    for _ in range(L):
        for parity in ((0, 1) if n > 2 else (0,)):
            for top in range(1 + parity, n, 2):
                for i in range(k):
                    placements.append((seed, top, off + i * (seed.columns - 1)))
            off += w
    return tile_config(n, placements)


__all__ = [
    "HADAMARD", "CZ", "z_phase", "hz", "parse_angle", "GraphGadget", "build_gadget",
    "outcome_unitary", "enumerate_unitaries", "enumerate_ensemble", "apply_outcomes",
    "preset", "PRESETS", "FIG3_BIT_MAP", "fig3_outcome_index", "tile_config",
    "brickwork_config", "cz_diagonal", "CONVENTIONS",
]
