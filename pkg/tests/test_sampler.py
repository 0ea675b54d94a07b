import json
import math

import numpy as np
import pytest

from dforge.ensembles import uniform
from dforge.errors import CapacityError, DomainError
from dforge.gadgets import build_gadget, preset
from dforge.linalg import haar_unitary
from dforge.sampler import (BLOCK, anticoncentration_estimate, anticoncentration_rhs,
                            exact_distribution, haar_tail_probability, porter_thomas_histogram,
                            sample_distribution, tv_distance)

from oracles import graph_state_output


def wire():
    return build_gadget({"rows": 1, "columns": 2, "angles": [[0]]})


def fig1(a=0.3, b=1.1):
    return build_gadget(preset("fig1", [a, b]))


# --------------------------------------------------------------------------
# exact tables


def test_wire_is_uniform():
    D = exact_distribution(wire())
    assert D.table.shape == (2, 2)
    assert np.allclose(D.table, 0.25)


def test_fig1_zero_angles_against_oracle():
    g = fig1(0.0, 0.0)
    D = exact_distribution(g)
    psi = np.zeros(4, dtype=complex)
    psi[0] = 1
    for y in range(4):
        bits = [(y >> k) & 1 for k in range(2)]
        out = graph_state_output(g, bits, psi)
        assert np.allclose(D.table[y], np.abs(out) ** 2 / 4, atol=1e-12)
    assert D.table.sum() == pytest.approx(1.0)


@pytest.mark.parametrize("name,params", [("fig1", [0.7, 2.4]), ("cgen", [0.3, 1.9])])
def test_exact_table_against_oracle_with_random_input(name, params):
    g = build_gadget(preset(name, params))
    rng = np.random.default_rng(5)
    psi = rng.normal(size=g.dim) + 1j * rng.normal(size=g.dim)
    psi /= np.linalg.norm(psi)
    D = exact_distribution(g, input_state=psi)
    for y in rng.integers(0, 2 ** g.n_measured, size=6):
        bits = [(int(y) >> k) & 1 for k in range(g.n_measured)]
        ref = np.abs(graph_state_output(g, bits, psi)) ** 2 / 2 ** g.n_measured
        assert np.allclose(D.table[y], ref, atol=1e-12)


def test_marginals():
    D = exact_distribution(fig1())
    assert np.allclose(D.marginal_y(), 0.25)
    assert D.marginal_x().sum() == pytest.approx(1.0)
    assert np.allclose(D.marginal_x(), D.table.sum(axis=0))
    recs = list(D.records())
    assert len(recs) == 16 and recs[1].x == (0, 1) and recs[4].y == (1, 0)
    assert json.loads(D.to_json())["rows"] == 2


def test_exact_cap_and_input_validation():
    g = build_gadget(preset("linear", [0.1] * 10))
    with pytest.raises(CapacityError):
        exact_distribution(g, max_bits=8)
    with pytest.raises(DomainError):
        exact_distribution(fig1(), input_state=[1, 1, 0, 0])
    with pytest.raises(DomainError):
        exact_distribution(fig1(), input_state=[1, 0])


# --------------------------------------------------------------------------
# sampling


def test_samples_match_exact_table():
    g = fig1(0.9, 2.2)
    D = exact_distribution(g)
    S = sample_distribution(g, 100_000, seed=3)
    dist = tv_distance(S.empirical(), D.table)
    assert dist.tv <= 0.02 and dist.l1 <= 0.03
    assert dist.l1 == pytest.approx(2 * dist.tv)
    # every cell within 4 standard errors
    emp, p = S.empirical().ravel(), D.table.ravel()
    z = np.abs(emp - p) / np.sqrt(np.maximum(p * (1 - p), 1e-12) / len(S))
    assert z.max() <= 4


def test_sampling_is_deterministic_and_thread_independent():
    g = fig1()
    a = sample_distribution(g, 3 * BLOCK + 17, seed=42)
    b = sample_distribution(g, 3 * BLOCK + 17, seed=42, workers=3)
    assert np.array_equal(a.x, b.x) and np.array_equal(a.y, b.y)
    c = sample_distribution(g, 3 * BLOCK + 17, seed=43)
    assert not np.array_equal(a.x, c.x)
    # a prefix run reproduces the first blocks exactly
    d = sample_distribution(g, BLOCK, seed=42)
    assert np.array_equal(d.x, a.x[:BLOCK])


def test_lblock_two_qubits_within_multinomial_bound():
    g = build_gadget(preset("lblock", [2, 1, 1, math.pi / 6, math.acos(math.sqrt(1 / 3))]))
    D = exact_distribution(g)
    S = sample_distribution(g, 50_000, seed=9)
    px = D.marginal_x()
    counts = np.bincount(S.x, minlength=4) / len(S)
    assert np.all(np.abs(counts - px) <= 3 * np.sqrt(px * (1 - px) / len(S)) + 1e-12)


def test_samples_export(tmp_path):
    S = sample_distribution(fig1(), 10, seed=1)
    path = tmp_path / "s.csv"
    S.to_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "y0,y1,x1,x2" and len(lines) == 11
    assert len(list(S.records())) == 10
    assert np.array_equal(S.x_bits() @ np.array([2, 1]), S.x)


def test_sampler_validation():
    with pytest.raises(DomainError):
        sample_distribution(fig1(), 0, seed=1)
    with pytest.raises(DomainError):
        sample_distribution(fig1(), 10, seed=-1)
    with pytest.raises(DomainError):
        sample_distribution(fig1(), 10, seed=1.5)


# --------------------------------------------------------------------------
# anti-concentration


def test_rhs_formula():
    assert anticoncentration_rhs(0.1132, 0.1132) == pytest.approx(
        (1 - 0.1132) ** 2 * (1 - 0.1132) / (2 * 1.1132))


@pytest.mark.parametrize("n", [2, 3])
def test_haar_source_matches_closed_form(n):
    r = anticoncentration_estimate("haar", 0.3, 0.1, 40_000, seed=n, n=n)
    ref = haar_tail_probability(2 ** n, 0.3, 0.1)
    assert abs(r.lhs - ref) <= 3 * r.sigma + 1e-3
    assert r.passed


def test_haar_tail_by_monte_carlo_columns():
    d = 4
    cols = haar_unitary(d, size=40_000, rng=8)[:, :, 0]
    frac = np.mean(np.abs(cols) ** 2 > 0.5 / d)
    assert frac == pytest.approx(haar_tail_probability(d, 0.5, 0.0), abs=0.01)


def test_identity_source_hits_only_zero_row():
    # |<x|0>|^2 exceeds the threshold only for x = 0
    r = anticoncentration_estimate(uniform([np.eye(4)]), 0.5, 0.1, 40_000, seed=2)
    assert r.lhs == pytest.approx(0.25, abs=0.01)
    lhs, rhs, passed = r
    assert rhs == pytest.approx(anticoncentration_rhs(0.5, 0.1))


def test_anticoncentration_thread_independent():
    g = fig1()
    a = anticoncentration_estimate(g, 0.2, 0.1, 2 * BLOCK + 5, seed=4)
    b = anticoncentration_estimate(g, 0.2, 0.1, 2 * BLOCK + 5, seed=4, workers=2)
    assert a == b
    assert set(a.to_dict()) == {"lhs", "rhs", "sigma", "passed", "threshold", "shots"}


def test_anticoncentration_validation():
    with pytest.raises(DomainError):
        anticoncentration_estimate("haar", 0.1, 0.1, 10, seed=1)
    with pytest.raises(DomainError):
        anticoncentration_estimate(fig1(), 1.0, 0.1, 10, seed=1)
    with pytest.raises(DomainError):
        anticoncentration_estimate(uniform([np.eye(3)]), 0.1, 0.1, 10, seed=1)
    with pytest.raises(DomainError):
        anticoncentration_estimate("gauss", 0.1, 0.1, 10, seed=1, n=2)


# --------------------------------------------------------------------------
# distances and histogram


def test_tv_examples():
    assert tv_distance([1, 0], [0, 1]).tv == pytest.approx(1.0)
    assert tv_distance([0.5, 0.5], [0.5, 0.5]).l1 == 0.0
    assert tv_distance([1.0], [0.5, 0.5]).tv == pytest.approx(0.5)
    d = tv_distance({"a": 0.5, "b": 0.5}, {"a": 1.0})
    assert d.tv == pytest.approx(0.5) and d.l1 == pytest.approx(1.0)


def test_tv_validation():
    with pytest.raises(DomainError):
        tv_distance([0.5, 0.4], [0.5, 0.5])
    with pytest.raises(DomainError):
        tv_distance([1.5, -0.5], [0.5, 0.5])
    with pytest.raises(DomainError):
        tv_distance({"a": 1.0}, [1.0])


def test_porter_thomas_histogram():
    d = 8
    probs = np.abs(haar_unitary(d, size=20_000, rng=3)[:, :, 0]) ** 2
    h = porter_thomas_histogram(probs, d, bins=16, s_max=4.0)
    dens, ref = np.array(h["density"]), np.array(h["haar_density"])
    assert len(h["edges"]) == 17
    assert np.abs(dens - ref).max() < 0.05
    json.dumps(h)
