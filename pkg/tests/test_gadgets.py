import math
import zlib

import numpy as np
import pytest

from dforge.ensembles import (block_compose, concat_power, dedup_up_to_phase, embed_pair,
                              same_multiset)
from dforge.errors import CapacityError, DomainError
from dforge.gadgets import (CZ, HADAMARD, FIG3_BIT_MAP, apply_outcomes, build_gadget,
                            enumerate_ensemble, enumerate_unitaries, fig3_outcome_index, hz,
                            outcome_unitary, parse_angle, preset, z_phase)

from oracles import graph_state_output

ALPHA3, BETA3 = math.pi / 6, math.acos(math.sqrt(1 / 3))


def wire():
    return build_gadget({"rows": 1, "columns": 2, "angles": [[0]]})


def test_hz_is_h_times_phase():
    assert np.allclose(hz(0.4), HADAMARD @ z_phase(0.4))


def test_build_fig1_and_wire():
    g = build_gadget({"rows": 2, "columns": 2, "angles": [[0.3], [0.7]],
                      "vertical_edges": [[2, 1]]})
    assert g.dim == 4 and g.n_measured == 2
    assert g.vertical_edges == ((2, 1),)
    w = wire()
    assert w.n_measured == 1 and w.vertical_edges == ()


@pytest.mark.parametrize("cfg", [
    {"rows": 2, "columns": 2, "angles": [[0], [0]], "vertical_edges": [[3, 1]]},
    {"rows": 2, "columns": 2, "angles": [[0], [0]], "vertical_edges": [[1, 2]]},
    {"rows": 2, "columns": 2, "angles": [[0]]},
    {"rows": 1, "columns": 2, "angles": [[0]], "colour": 1},
    {"rows": 0, "columns": 2, "angles": []},
    {"rows": 1, "columns": 3, "angles": [[0, 0]], "skip_sites": [[3, 1]]},
    {"rows": 1, "columns": 2, "angles": [[0]], "convention": "other"},
    {"rows": 2, "columns": 2, "angles": [[0], [0]], "vertical_edges": [[2, 1], [2, 1]]},
])
def test_build_rejects_invalid(cfg):
    with pytest.raises(DomainError):
        build_gadget(cfg)


def test_parse_angle():
    assert parse_angle("pi/6") == pytest.approx(math.pi / 6)
    assert parse_angle("acos(sqrt(1/3))") == pytest.approx(BETA3)
    assert parse_angle(-2) == -2.0
    for bad in ("__import__('os')", "pi.real", "1 if 1 else 2", "nan", True):
        with pytest.raises(DomainError):
            parse_angle(bad)


def test_fig1_zero_outcome_is_cz_times_rotations():
    a, b = 0.3, 1.1
    g = build_gadget(preset("fig1", [a, b]))
    assert np.allclose(outcome_unitary(g, (0, 0)), CZ @ np.kron(hz(a), hz(b)))
    # bit order: column-major, so bit 0 is row 1
    assert np.allclose(outcome_unitary(g, 1), CZ @ np.kron(hz(a + np.pi), hz(b)))
    assert np.allclose(outcome_unitary(g, (0, 1)), CZ @ np.kron(hz(a), hz(b + np.pi)))


def test_wire_outcomes():
    assert np.allclose(outcome_unitary(wire(), (1,)), HADAMARD @ np.diag([1, -1]))
    E = enumerate_ensemble(wire())
    assert np.allclose(E.probs, 0.5)
    assert np.allclose(E.unitaries[0], HADAMARD)
    assert np.allclose(E.unitaries[1], hz(np.pi))


def test_fig3_zero_outcome_matches_product():
    g = build_gadget(preset("fig3", [ALPHA3, BETA3]))
    a, b = ALPHA3, BETA3
    ref = (np.kron(hz(b), hz(b)) @ CZ
           @ np.kron(hz(0) @ hz(a) @ hz(0), hz(a) @ hz(0) @ hz(a)))
    assert np.abs(outcome_unitary(g, [0] * 8) - ref).max() < 1e-12


def test_fig3_reference_labels():
    g = build_gadget(preset("fig3", [ALPHA3, BETA3]))
    order = list(g.measured_sites)
    for label, site in FIG3_BIT_MAP.items():
        m = [0] * 8
        m[label - 1] = 1
        assert fig3_outcome_index(m) == 1 << order.index(site)


def test_enumeration_sizes():
    E1 = enumerate_ensemble(build_gadget(preset("fig1", [0.3, 1.1])))
    assert len(E1) == 4 and np.allclose(E1.probs, 0.25)
    E3 = enumerate_ensemble(build_gadget(preset("fig3", [ALPHA3, BETA3])))
    assert len(E3) == 256 and np.allclose(E3.probs, 1 / 256)
    assert 0 < len(dedup_up_to_phase(E3)) < 256


def test_enumeration_matches_outcome_unitary():
    g = build_gadget(preset("fig3", [0.4, 1.3]))
    U = enumerate_unitaries(g)
    for m in (0, 1, 77, 200, 255):
        assert np.allclose(U[m], outcome_unitary(g, m))


def test_enumeration_cap():
    g = build_gadget(preset("linear", [0.1] * 12))
    with pytest.raises(CapacityError):
        enumerate_unitaries(g, max_bits=10)


def test_outcome_validation():
    g = build_gadget(preset("fig1", [0.3, 1.1]))
    for bad in ((0,), (0, 2), 4, -1):
        with pytest.raises(DomainError):
            outcome_unitary(g, bad)


def test_apply_outcomes_matches_unitaries():
    rng = np.random.default_rng(0)
    g = build_gadget(preset("lblock", [3, 1, 2], seed="fig1", seed_params=[0.3, 1.1]))
    bits = rng.integers(0, 2, size=(7, g.n_measured))
    psi = rng.normal(size=(7, 8)) + 1j * rng.normal(size=(7, 8))
    out = apply_outcomes(g, bits, psi)
    for s in range(7):
        assert np.allclose(out[s], outcome_unitary(g, bits[s]) @ psi[s])


def test_measurement_convention_negates_angles():
    cm = preset("fig3", [0.4, 1.3])
    cm["convention"] = "measurement"
    gm = build_gadget(cm)
    neg = preset("fig3", [-0.4, -1.3])
    gc = build_gadget(neg)
    for m in (0, 5, 99):
        assert np.allclose(outcome_unitary(gm, m), outcome_unitary(gc, m))


def test_config_round_trip():
    g = build_gadget(preset("lblock", [3, 1, 1, 0.2, 0.9], seed="fig1"))
    h = build_gadget(g.to_config())
    assert h.skip_sites == g.skip_sites and h.vertical_edges == g.vertical_edges
    assert np.allclose(enumerate_unitaries(g), enumerate_unitaries(h))


def test_preset_errors():
    with pytest.raises(DomainError):
        preset("nope", [])
    with pytest.raises(DomainError):
        preset("fig1", [0.1])
    with pytest.raises(DomainError):
        preset("block", [1, 1, 0.1, 0.2])
    with pytest.raises(DomainError):
        preset("kgb", [2, 0.1, 0.2], seed="fig2")
    with pytest.raises(DomainError):
        build_gadget({"preset": "fig1", "params": [0, 0], "rows": 2})


def test_cgen_layout():
    g = build_gadget(preset("cgen", [0.1, 0.2, 0.3]))
    assert (g.rows, g.columns) == (3, 2)
    assert g.vertical_edges == ((2, 1), (2, 2))


# --------------------------------------------------------------------------
# graph-state oracle


CASES = [
    ("fig1", [0.3, 1.1], {}),
    ("fig3", [ALPHA3, BETA3], {}),
    ("cgen", [1.0, math.sqrt(2)], {}),
    ("cgen", [0.2, 2.9, 4.4], {}),
    ("linear", [0.5, 1.5], {}),
    ("lblock", [2, 1, 1, ALPHA3, BETA3], {}),
    ("lblock", [3, 1, 1, 0.6, 2.1], {"seed": "fig1"}),
    ("kgb", [2, 0.6, 2.1], {"seed": "fig1"}),
]


@pytest.mark.parametrize("convention", ["circuit", "measurement"])
@pytest.mark.parametrize("name,params,kw", CASES)
def test_graph_state_projection_oracle(name, params, kw, convention):
    cfg = preset(name, params, **kw)
    cfg["convention"] = convention
    g = build_gadget(cfg)
    rng = np.random.default_rng(zlib.crc32(f"{name}{params}{convention}".encode()))
    for _ in range(4):
        bits = rng.integers(0, 2, size=g.n_measured)
        psi = rng.normal(size=g.dim) + 1j * rng.normal(size=g.dim)
        psi /= np.linalg.norm(psi)
        ref = graph_state_output(g, bits, psi)
        got = outcome_unitary(g, bits) @ psi
        assert abs(np.vdot(ref, got)) >= 1 - 1e-8


# --------------------------------------------------------------------------
# tiling versus ensemble composition


def test_kgb_equals_concat_power():
    seed = build_gadget(preset("fig1", [0.6, 2.1]))
    g = build_gadget(preset("kgb", [3, 0.6, 2.1], seed="fig1"))
    E = concat_power(enumerate_ensemble(seed), 3)
    assert np.allclose(enumerate_unitaries(g), E.unitaries)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_block_preset_equals_block_compose(n):
    E = enumerate_ensemble(build_gadget(preset("fig1", [0.6, 2.1])))
    g = build_gadget(preset("block", [n, 1, 0.6, 2.1], seed="fig1"))
    assert same_multiset(enumerate_ensemble(g), block_compose(E, n))


def _tile_bits(big, tile, top, off, bits):
    order = {site: i for i, site in enumerate(big.measured_sites)}
    return [bits[order[(off + j, top + dr - 1)]] for (j, dr) in tile.measured_sites]


def test_lblock_fig3_matches_block_product_on_sampled_outcomes():
    # 24 measured qubits: too many to enumerate, so compare outcome by outcome
    tile = build_gadget(preset("fig3", [ALPHA3, BETA3]))
    big = build_gadget(preset("lblock", [4, 1, 1, ALPHA3, BETA3]))
    assert big.n_measured == 24
    w = tile.columns - 1
    placements = [(1, 0), (3, 0), (2, w)]        # odd layer, then even layer
    rng = np.random.default_rng(11)
    for _ in range(25):
        bits = rng.integers(0, 2, size=24)
        W = np.eye(16)
        for top, off in placements:
            U = outcome_unitary(tile, _tile_bits(big, tile, top, off, bits))
            W = embed_pair(U, top, 4) @ W
        got = outcome_unitary(big, bits)
        assert np.abs(got - W).max() < 1e-12
