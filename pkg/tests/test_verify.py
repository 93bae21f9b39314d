import math

import numpy as np
import pytest

from fgsim import oracle as O
from fgsim import verify as V
from fgsim.decomp_channel import equimagical_noisy_rotation, naive_noisy_rotation
from fgsim.decomp_unitary import circuit, gaussian_decomposition
from fgsim.decomp_channel import ChannelDecomposition, unitary_branch
from fgsim.errors import InvalidArgument
from fgsim.gaussian_core import prepare_basis_state


def test_y_rotation_extent_witness():
    for theta in np.linspace(0, math.pi, 7):
        psi = O.rot(O.Y, theta) @ O.basis_vector([0])
        rep = V.extent_witness_check(V.single_qubit_witness(0.0), psi, 2000, seed=1,
                                     claimed=1 + math.sin(theta))
        assert rep.validity and rep.matches_claim
        assert rep.kind == "sampled validity"


def test_zz_witness_is_valid():
    rep = V.extent_witness_check(V.zz_witness(1), V.u_state(0.3), 10_000, seed=2)
    assert rep.validity and rep.max_gaussian_overlap <= 1 + V.WITNESS_TOL


def test_basis_witness_on_itself():
    e = O.basis_vector([1, 0, 1])
    assert V.extent_witness_check(e, e, 500).value == pytest.approx(1.0)


def test_dyadic_values():
    theta, p = 1.1, 0.2
    rho = sum(w * K @ np.diag([1, 0]) @ K.conj().T
              for w, K in [(1 - p, O.rot(O.Y, theta)), (p, O.Y @ O.rot(O.Y, theta))])
    W = V.dyad(V.y_witness_for(theta))
    assert V.dyadic_witness_value(W, rho) == pytest.approx(1 + (1 - 2 * p) * abs(math.sin(theta)))
    assert V.dyadic_witness_value(np.eye(2), rho) == pytest.approx(1.0)
    phi = 0.7
    assert V.dyadic_witness_value(V.dyad(V.zz_witness_for(phi)), V.dyad(V.u_state(phi))) == \
        pytest.approx(1 + abs(math.sin(phi)))
    with pytest.raises(InvalidArgument):
        V.dyadic_witness_value(np.array([[0, 1], [0, 0]]), rho)


def test_sandwich_chain():
    g = V.bell_pairs_state(2)
    for theta, p in [(0.4, 0.1), (2.5, 0.3)]:
        lo, hi = V.sandwich_bounds(equimagical_noisy_rotation("ZZ", theta, p), g)
        want = 1 + (1 - 2 * p) * abs(math.sin(theta))
        assert lo == pytest.approx(want, abs=1e-9) and hi == pytest.approx(want, abs=1e-9)
        lo, hi = V.sandwich_bounds(naive_noisy_rotation("ZZ", theta, p), g)
        assert lo < hi - 1e-6
    free = ChannelDecomposition(2, (unitary_branch(1.0, gaussian_decomposition(circuit(2))),))
    assert V.sandwich_bounds(free, g) == pytest.approx((1.0, 1.0))
    assert V.sandwich_bounds(equimagical_noisy_rotation("Y", 1.0, 0.1),
                             prepare_basis_state([0]))[1] == pytest.approx(1 + 0.8 * math.sin(1.0))


def test_plus_state_fidelity_anchor():
    for t in (1, 2, 4):
        anchor, sampled = V.plus_state_fidelity(t, samples=2000, seed=t)
        assert anchor == pytest.approx(0.5)
        assert sampled <= anchor + 1e-9


def test_twirl_examples():
    diag = np.diag(np.exp(1j * np.array([0.0, 0.3, 1.7, -2.2])))
    assert V.z_twirl_trace_check(diag) == (True, pytest.approx(0.0, abs=1e-12))
    is_diag, d = V.z_twirl_trace_check(O.SWAP)
    assert not is_diag and d > 0
    assert V.z_twirl_trace_check(np.kron(O.H, np.eye(2)))[1] > 0
    with pytest.raises(InvalidArgument):
        V.z_twirl_trace_check(2 * np.eye(2))


def test_random_gaussian_vectors_are_gaussian():
    vecs = V.random_gaussian_vectors(3, 50, seed=0)
    assert np.allclose(np.linalg.norm(vecs, axis=1), 1.0)
    # a fixed parity per sample
    odd = np.array([bin(i).count("1") & 1 for i in range(8)], bool)
    for v in vecs:
        assert np.allclose(v[odd], 0) or np.allclose(v[~odd], 0)
