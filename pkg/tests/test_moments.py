import math

import numpy as np
import pytest

from dforge.ensembles import UnitaryEnsemble, concat_power, uniform
from dforge.errors import DomainError
from dforge.gadgets import CZ, build_gadget, enumerate_ensemble, preset
from dforge.linalg import haar_unitary, spectral_norm
from dforge.moments import (block_factorization_check, commutant_dimension, cycle_count,
                            design_epsilon, design_report, frame_potential, frame_potential_haar,
                            haar_factors, haar_moment, moment_matvec, moment_op,
                            prop1_decay_check, realign, subdominant_lambda, tpe_eta,
                            write_eigenvalues_csv)

from oracles import (frame_potential_by_loops, haar_fp_by_counting, moment_by_loops,
                     twirl_projector_t1)

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]])
Z = np.diag([1.0, -1.0]).astype(complex)
PAULIS = uniform([I2, X, Y, Z])


def fig1(a=0.3, b=1.1):
    return enumerate_ensemble(build_gadget(preset("fig1", [a, b])))


def cgen():
    return enumerate_ensemble(build_gadget(preset("cgen", [1.0, math.sqrt(2)])))


# --------------------------------------------------------------------------
# moment operators


def test_moment_op_small_examples():
    assert np.allclose(moment_op(uniform([I2]), 1).matrix, np.eye(4))
    M = moment_op(uniform([I2, X]), 1).matrix
    assert np.allclose(M, 0.5 * (np.eye(4) + np.kron(X, X)))


@pytest.mark.parametrize("t", [1, 2])
def test_moment_op_matches_loops(t):
    E = fig1()
    M = moment_op(E, t).matrix
    assert M.shape == (4 ** (2 * t),) * 2
    ref = moment_by_loops(E.probs, E.unitaries, t)
    assert np.abs(M - ref).max() < 1e-12
    assert spectral_norm(M) <= 1 + 1e-8


def test_moment_matvec_and_adjoint():
    E = uniform(haar_unitary(3, size=3, rng=0))
    M = moment_op(E, 2).matrix
    v = np.random.default_rng(1).normal(size=81) + 0j
    assert np.allclose(moment_matvec(E, 2)(v), M @ v)
    assert np.allclose(moment_matvec(E, 2, adjoint=True)(v), M.conj().T @ v)


def test_moment_power():
    E = fig1()
    M = moment_op(E, 1)
    assert np.allclose(M.power(3).matrix, moment_op(concat_power(E, 3), 1).matrix)


def test_t_validation():
    with pytest.raises(DomainError):
        moment_op(fig1(), 0)


# --------------------------------------------------------------------------
# Haar reference


def test_haar_t1_projector():
    assert np.allclose(haar_moment(2, 1).matrix, twirl_projector_t1(2))
    expected = np.zeros((4, 4))
    for i in range(2):
        for j in range(2):
            expected[3 * i, 3 * j] = 0.5
    assert np.allclose(haar_moment(2, 1).matrix, expected)


@pytest.mark.parametrize("d,t", [(2, 2), (3, 2), (2, 3)])
def test_haar_projector_is_hermitian_idempotent(d, t):
    P = haar_moment(d, t).matrix
    assert spectral_norm(P @ P - P) <= 1e-8
    assert np.abs(P - P.conj().T).max() <= 1e-12


@pytest.mark.parametrize("d,t", [(2, 1), (4, 2), (4, 3), (2, 3)])
def test_haar_trace_equals_permutation_rank(d, t):
    F = haar_factors(d, t)
    assert F.rank == haar_fp_by_counting(d, t)
    trace = np.trace(F.Gpinv @ (F.V.conj().T @ F.V)).real
    assert round(trace) == F.rank and abs(trace - F.rank) < 1e-8
    assert frame_potential_haar(d, t) == F.rank


def test_haar_trace_small_d():
    # t > d: fewer independent permutations than t!
    assert haar_factors(2, 3).rank == 5 < math.factorial(3)


def test_cycle_count():
    assert cycle_count([0, 1, 2]) == 3
    assert cycle_count([1, 2, 0]) == 1
    assert cycle_count([1, 0, 2]) == 2


def test_haar_montecarlo_agrees_with_projector():
    P = haar_moment(2, 2).matrix
    Q = haar_moment(2, 2, method="montecarlo", samples=100_000, rng=1).matrix
    assert spectral_norm(P - Q) <= 0.02


# --------------------------------------------------------------------------
# eta and lambda


def test_eta_trivial_cases():
    for t in (1, 2):
        assert tpe_eta(uniform([I2]), t) == pytest.approx(1.0, abs=1e-12)
    assert tpe_eta(uniform([I2, X]), 1) == pytest.approx(1.0, abs=1e-12)
    assert tpe_eta(PAULIS, 1) < 1e-12


def test_eta_of_single_layer_gadget_is_one():
    # the outcome randomness is a Z-twirl, a projector D; M = W D with W
    # unitary, so any vector in range(D) orthogonal to the Haar space keeps
    # its norm and ||M - P|| = 1
    E = fig1()
    for t in (1, 2):
        assert tpe_eta(E, t) == pytest.approx(1.0, abs=1e-10)


def test_eta_iterative_matches_dense():
    E = fig1(0.9, 2.3)
    assert tpe_eta(E, 2, method="iterative") == pytest.approx(tpe_eta(E, 2, method="dense"),
                                                               abs=1e-8)
    E2 = concat_power(E, 3)
    assert tpe_eta(E2, 2, method="iterative") == pytest.approx(tpe_eta(E2, 2, method="dense"),
                                                                abs=1e-8)


@pytest.mark.parametrize("angles", [(0.3, 1.1), (2.0, 4.5), (5.1, 0.2)])
def test_lambda_zero_at_t1_fig1(angles):
    r = subdominant_lambda(fig1(*angles), 1)
    assert r.value <= 1e-10
    assert r.nilpotent_index == 2


def test_lambda_zero_at_t1_linear_cluster():
    E = enumerate_ensemble(build_gadget(preset("linear", [0.7, 0.7])))
    r = subdominant_lambda(E, 1)
    assert r.value <= 1e-10
    assert frame_potential(E, 1) == pytest.approx(1.0, abs=1e-8)


def test_lambda_t2_equals_t3_fig1():
    E = fig1()
    l2 = subdominant_lambda(E, 2).value
    l3 = subdominant_lambda(E, 3).value
    assert abs(l2 - l3) <= 1e-6
    # frozen from the dense complement compression
    assert l2 == pytest.approx(0.9255801696701726, abs=1e-9)


def test_lambda_dense_and_arnoldi_agree():
    E = fig1(0.9, 2.3)
    d = subdominant_lambda(E, 2, method="dense")
    a = subdominant_lambda(E, 2, method="arnoldi")
    assert d.value == pytest.approx(a.value, abs=1e-8)
    assert d.cross_estimate == pytest.approx(d.value, abs=1e-6)


def test_lambda_bounded_by_eta():
    E = concat_power(fig1(0.9, 2.3), 2)
    assert subdominant_lambda(E, 2).value <= tpe_eta(E, 2) + 1e-10


def test_lambda_of_identity_is_one():
    assert subdominant_lambda(uniform([I2]), 1).value == pytest.approx(1.0)


# --------------------------------------------------------------------------
# frame potential and epsilon


def test_frame_potential_singleton():
    for t in (1, 2, 3):
        assert frame_potential(uniform([haar_unitary(3, rng=t)]), t) == pytest.approx(3 ** (2 * t))


def test_frame_potential_matches_loops():
    E = enumerate_ensemble(build_gadget(preset("cgen", [0.4, 2.2])))
    for t in (1, 2):
        assert frame_potential(E, t) == pytest.approx(
            frame_potential_by_loops(E.probs, E.unitaries, t), rel=1e-12)


def test_frame_potential_haar_monte_carlo():
    N = 4000
    E = uniform(haar_unitary(4, size=N, rng=3))
    fp = frame_potential(E, 2)
    # the N diagonal pairs contribute d^4 / N each; the rest estimate 2
    off = (fp - 256 / N) * N / (N - 1)
    assert abs(off - 2.0) < 0.1


def test_frame_potential_fig1_t1():
    # distinct outcome unitaries differ by Z-type Paulis, so they are
    # Hilbert-Schmidt orthogonal: FP = sum_i p_i^2 d^2 = 4, above the Haar value 1
    assert frame_potential(fig1(), 1) == pytest.approx(4.0, abs=1e-10)


def test_realign_is_involution():
    M = np.random.default_rng(4).normal(size=(16, 16))
    assert np.allclose(realign(realign(M, 2, 2), 2, 2), M)
    with pytest.raises(DomainError):
        realign(M, 2, 1)


def test_design_epsilon_exact_and_singleton():
    assert design_epsilon(PAULIS, 1).epsilon <= 1e-8
    r = design_epsilon(uniform([I2]), 1)
    assert math.isinf(r.epsilon)
    assert r.reason == "rank-deficient"
    assert r.to_dict()["epsilon_star"] == "inf"


def test_design_epsilon_non_increasing_in_k():
    M = moment_op(fig1(5.459, 3.984), 2)
    eps = [design_epsilon(M, 2, power=k).epsilon for k in range(1, 16)]
    for a, b in zip(eps, eps[1:]):
        assert b <= a + 1e-9
    assert eps[-1] < 0.1


def test_design_epsilon_power_matches_concat():
    E = fig1(5.459, 3.984)
    a = design_epsilon(moment_op(E, 1), 1, power=3)
    b = design_epsilon(concat_power(E, 3), 1)
    assert a.g_min == pytest.approx(b.g_min, abs=1e-10)


# --------------------------------------------------------------------------
# identities


def test_block_factorization_random_pair():
    for seed in range(3):
        E = uniform(haar_unitary(4, size=2, rng=seed))
        assert block_factorization_check(E, 4, 1) <= 1e-10


def test_block_factorization_cz_and_fig1():
    assert block_factorization_check(uniform([CZ]), 4, 1) <= 1e-12
    assert block_factorization_check(fig1(), 4, 1) <= 1e-10
    assert block_factorization_check(fig1(), 3, 1) <= 1e-10


def test_power_decay_check():
    rows = prop1_decay_check(PAULIS, 1, 3)
    assert all(r["norm"] <= 1e-8 for r in rows)
    rows = prop1_decay_check(uniform([I2]), 1, 4)
    assert all(r["norm"] == pytest.approx(1.0) and r["ok"] for r in rows)
    rows = prop1_decay_check(fig1(), 2, 5)
    assert all(r["ok"] for r in rows)
    norms = [r["norm"] for r in rows]
    assert all(b <= a + 1e-12 for a, b in zip(norms, norms[1:]))


def test_commutant_dimension():
    assert commutant_dimension(cgen(), 1) == 1
    assert commutant_dimension(cgen(), 2) == 2
    assert commutant_dimension(uniform([I2]), 1) == 4
    assert commutant_dimension(PAULIS, 1) == 1
    assert commutant_dimension(PAULIS, 2) > 2


# --------------------------------------------------------------------------
# reports


def test_design_report_fields(tmp_path):
    rep = design_report(PAULIS, 1)
    assert rep.exact_design and rep.eta <= 1e-10
    d = rep.to_dict()
    assert d["frame_potential"] == pytest.approx(1.0)
    rep2 = design_report(fig1(), 1, epsilon=False)
    assert rep2.to_dict()["epsilon_star"] == "not-computed"
    assert not rep2.exact_design
    path = tmp_path / "eig.csv"
    write_eigenvalues_csv(path, [1.0, 0.5j])
    lines = path.read_text().splitlines()
    assert lines[0] == "index,real,imag,modulus" and len(lines) == 3


def test_ensemble_with_phases_has_same_moments():
    E = fig1()
    F = UnitaryEnsemble(E.probs, E.unitaries * np.exp(1j * np.arange(4))[:, None, None])
    assert np.allclose(moment_op(E, 2).matrix, moment_op(F, 2).matrix)
