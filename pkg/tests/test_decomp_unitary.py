import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from fgsim import oracle as O
from fgsim.decomp_unitary import (TwoQubitFermionicParams, cphase_decomposition,
                                  decompose_two_qubit_fermionic, kak_fermionic, kak_matrix,
                                  lift_gadget, magic_state_decomposition,
                                  optimal_unitary_decomposition, plus_state_decomposition,
                                  rzz_decomposition, swap_decomposition)
from fgsim.errors import InvalidArgument
from fgsim.gaussian_core import overlap
from fgsim.verify import parity_states


def dense_sum(decomp):
    return sum(c * O.dense_state_from_gaussian(s) for c, s in decomp.terms)


def test_rzz_quarter_turn():
    d = optimal_unitary_decomposition("rzz", math.pi / 2)
    assert d.rank == 2
    assert d.extent == pytest.approx(2.0, abs=1e-12)
    assert np.allclose(O.decomposition_matrix(d), O.gate_matrix("rzz", (math.pi / 2,)), atol=1e-12)


def test_hadamard_terms():
    d = optimal_unitary_decomposition("hadamard")
    assert d.rank == 2 and d.extent == pytest.approx(2.0)
    assert sorted(abs(c) for c, _ in d.terms) == pytest.approx([2 ** -0.5] * 2)
    assert np.allclose(O.decomposition_matrix(d), O.gate_matrix("h"), atol=1e-12)
    mats = [O.dense_gaussian_unitary(k) for _, k in d.terms]
    # each term is Z or X up to a global phase
    for M in mats:
        ph = M[np.unravel_index(np.argmax(np.abs(M)), M.shape)]
        M = M / ph
        assert np.allclose(M, np.diag([1, -1])) or np.allclose(M, [[0, 1], [1, 0]])


def test_zero_angle_is_single_identity_term():
    d = optimal_unitary_decomposition("rzz", 0.0)
    assert d.rank == 1 and d.extent == pytest.approx(1.0)
    assert np.allclose(O.decomposition_matrix(d), np.eye(4))


def test_unknown_gate_rejected():
    with pytest.raises(InvalidArgument):
        optimal_unitary_decomposition("toffoli")


def test_kak_of_rzz_is_canonical():
    th = 0.9
    p, g = kak_fermionic(O.gate_matrix("rzz", (th,)))
    assert (p.a, p.b) == pytest.approx((0.0, 0.0), abs=1e-12)
    assert p.c == pytest.approx(th)
    assert max(abs(t) for t in (p.t1, p.t2, p.t3, p.t4)) < 1e-12


def test_kak_of_cz():
    U = O.cphase_matrix(math.pi)
    p, g = kak_fermionic(U)
    assert np.allclose(g * kak_matrix(p), U, atol=1e-10)
    assert abs(math.sin(p.c)) == pytest.approx(1.0)


def random_params(r):
    return TwoQubitFermionicParams(*r.uniform(-math.pi, math.pi, 6), r.uniform(-1.5, 1.5))


@given(seed=st.integers(0, 10 ** 6))
def test_kak_round_trip_from_parameters(seed):
    r = np.random.default_rng(seed)
    U = np.exp(1j * r.uniform(0, 6.28)) * kak_matrix(random_params(r))
    p, g = kak_fermionic(U)
    assert np.max(np.abs(g * kak_matrix(p) - U)) <= 1e-9


def test_nearest_cz_two_terms():
    d = decompose_two_qubit_fermionic(O.cphase_matrix(math.pi), "nearest")
    assert d.rank == 2 and d.optimal
    assert d.extent_claim == pytest.approx(2.0)
    assert d.extent == pytest.approx(2.0)
    assert np.allclose(O.decomposition_matrix(d), O.cphase_matrix(math.pi), atol=1e-10)


def test_diagonal_on_distant_qubits():
    U = np.diag([1, 1, 1, np.exp(1j * math.pi / 3)])
    d = decompose_two_qubit_fermionic(U, "nonadjacent", n=3, targets=(0, 2))
    assert d.optimal and d.extent_claim == pytest.approx(1.5)
    assert d.extent == pytest.approx(1.5)
    assert np.allclose(O.decomposition_matrix(d), O.embed(U, (0, 2), 3), atol=1e-10)


def test_generic_nonadjacent_expansion():
    U = kak_matrix(TwoQubitFermionicParams(0.1, 0.2, 0.3, 0.4, math.pi / 4, math.pi / 4, math.pi / 4))
    d = decompose_two_qubit_fermionic(U, "nonadjacent", n=3, targets=(0, 2))
    assert d.rank == 8 and not d.optimal
    assert d.extent_claim == pytest.approx((1 + math.sqrt(2) / 2) ** 3)
    assert d.extent == pytest.approx(d.extent_claim)
    assert np.allclose(O.decomposition_matrix(d), O.embed(U, (0, 2), 3), atol=1e-10)


def test_parity_violation_rejected():
    with pytest.raises(InvalidArgument):
        decompose_two_qubit_fermionic(O.embed(O.gate_matrix("h"), (0,), 2))


def test_magic_state_terms():
    m0 = magic_state_decomposition(0.0)
    assert len(m0.terms) == 1 and m0.extent == pytest.approx(1.0)
    mpi = magic_state_decomposition(math.pi)
    assert len(mpi.terms) == 2 and mpi.extent == pytest.approx(2.0)
    assert sorted(abs(c) for c, _ in mpi.terms) == pytest.approx([math.cos(math.pi / 4)] * 2)
    (_, a), (_, b) = mpi.terms
    assert abs(overlap(a, b)) < 1e-12


def test_plus_state_decompositions():
    d = plus_state_decomposition(["plus"] * 3)
    assert len(d.terms) == 2 and d.extent == pytest.approx(2.0)
    e3, o3 = parity_states(3)
    vecs = [O.dense_state_from_gaussian(s) for _, s in d.terms]
    assert {round(abs(np.vdot(e3, v)), 9) for v in vecs} == {0.0, 1.0}
    assert np.allclose(dense_sum(d), np.full(8, 8 ** -0.5), atol=1e-10)
    single = plus_state_decomposition(["zero", "one"])
    assert len(single.terms) == 1 and single.extent == 1.0
    assert np.allclose(dense_sum(single), O.basis_vector([0, 1]))
    mixed = plus_state_decomposition(["zero", ("plus", math.pi / 2)])
    assert len(mixed.terms) == 2
    want = np.kron([1, 0], np.array([1, 1j]) / math.sqrt(2))
    assert np.allclose(dense_sum(mixed), want, atol=1e-10)


def test_gadget_identity_and_lift():
    rep = lift_gadget(np.eye(4))
    assert rep.error < 1e-12
    assert np.allclose(rep.choi_vector, np.kron(O.PSI_PLUS, O.PSI_PLUS))
    th = 1.2
    dec = cphase_decomposition(th)
    rep = lift_gadget(decomposition=dec)
    assert rep.error < 1e-10 and rep.lifted_error < 1e-10
    assert [c for c, _ in rep.lifted.terms] == pytest.approx([c for c, _ in dec.terms])
    rz = lift_gadget(decomposition=rzz_decomposition(0.3))
    assert rz.lifted.extent == pytest.approx(1 + math.sin(0.3))
    assert rz.lifted_error < 1e-10


def test_swap_decomposition_reconstructs():
    d = swap_decomposition()
    assert d.extent == pytest.approx(2.0)
    assert np.allclose(O.decomposition_matrix(d), O.SWAP, atol=1e-12)
