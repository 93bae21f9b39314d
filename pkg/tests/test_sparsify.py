import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from fgsim import oracle as O
from fgsim.decomp_channel import adaptive_nzz_single_z
from fgsim.decomp_unitary import (StateDecomposition, magic_state_decomposition,
                                  plus_state_decomposition, rzz_decomposition)
from fgsim.errors import InvalidArgument
from fgsim.gaussian_core import prepare_basis_state
from fgsim.rng import keyed_rng
from fgsim.sparsify import (c_tilde, choose_rank, critical_precision, expected_trace,
                            sparsify_adaptive, sparsify_circuit, sparsify_state,
                            trajectories, uniforms, uniforms_slice)


class DenseCache:
    def __init__(self):
        self.cache = {}

    def __call__(self, s):
        if id(s) not in self.cache:
            self.cache[id(s)] = (s, O.dense_state_from_gaussian(s))
        return self.cache[id(s)][1]

    def sum(self, sup):
        return sum(c * self(s) for c, s in sup.terms)


@given(seed=st.integers(0, 2 ** 32), start=st.integers(0, 50), size=st.integers(1, 20),
       T=st.integers(1, 7))
def test_slices_match_full_draw(seed, start, size, T):
    full = uniforms(seed, "tag", start + size, T)
    assert np.array_equal(uniforms_slice(seed, "tag", range(start, start + size), T), full[start:])


def test_keyed_streams_are_independent_of_order():
    a = keyed_rng(5, "x", 1).random(3)
    keyed_rng(5, "y").random(10)
    assert np.array_equal(a, keyed_rng(5, "x", 1).random(3))
    assert not np.array_equal(a, keyed_rng(5, "x", 2).random(3))


def test_single_term_copies():
    s = prepare_basis_state([0, 1])
    d = StateDecomposition(2, [(1.0, s)])
    sp = sparsify_state(d, 5, seed=1)
    assert sp.k == 5 and all(t is s for _, t in sp.terms)
    assert np.allclose(DenseCache().sum(sp), O.basis_vector([0, 1]))
    with pytest.raises(InvalidArgument):
        sparsify_state([], 3, 0)


def test_plus_state_mean_is_unbiased():
    d = plus_state_decomposition(["plus"] * 3)
    dense = DenseCache()
    want = sum(c * dense(s) for c, s in d.terms)
    samples = np.array([dense.sum(sparsify_state(d, 16, seed)) for seed in range(1000)])
    err = np.abs(samples.mean(axis=0) - want)
    sd = samples.std(axis=0) / math.sqrt(len(samples))
    assert np.all(err <= 4 * sd + 1e-12)


def test_magic_ensemble_trace_distance():
    d = magic_state_decomposition(math.pi)
    delta = 0.1
    k = choose_rank(d.extent, delta)
    assert k == 80
    dense = DenseCache()
    psi = sum(c * dense(s) for c, s in d.terms)
    rho = np.zeros((16, 16), dtype=complex)
    seeds = 1000
    for seed in range(seeds):
        v = dense.sum(sparsify_state(d, k, seed))
        v = v / np.linalg.norm(v)
        rho += np.outer(v, v.conj())
    dist = O.trace_distance(rho / seeds, np.outer(psi, psi.conj()))
    assert dist <= delta + delta ** 2


def test_gaussian_circuit_sparsifies_to_copies():
    from fgsim.decomp_unitary import circuit, gaussian_decomposition
    d = gaussian_decomposition(circuit(2))
    circs, scale = sparsify_circuit([d, d], 4, seed=0)
    assert len(circs) == 4 and scale == pytest.approx(0.25)
    assert all(np.allclose(O.dense_gaussian_unitary(c), np.eye(4)) for c in circs)


def test_rzz_branch_frequencies():
    d = rzz_decomposition(math.pi / 2)
    k = 100_000
    pattern = sparsify_adaptive([d, d, d], k, seed=11)
    sigma = math.sqrt(k * 0.25)
    for t in range(3):
        ones = int(pattern.gate_choices[:, t].sum())
        assert abs(ones - k / 2) <= 3 * sigma


def test_pattern_without_kraus_matches_circuit_draw():
    d = rzz_decomposition(0.7)
    circs, scale = sparsify_circuit([d, d], 6, seed=4)
    pat = sparsify_adaptive([d, d], 6, seed=4)
    assert pat.global_scale == pytest.approx(scale)
    for i, c in enumerate(circs):
        gates = d.terms[pat.gate_choices[i, 0]][1].gates + d.terms[pat.gate_choices[i, 1]][1].gates
        assert c.gates == gates
    assert trajectories(pat) == [()]
    adapt = adaptive_nzz_single_z(0.7, 0.5).branches[0].adaptive
    assert trajectories(sparsify_adaptive([d, adapt], 2, 0)) == [(0,), (1,)]


def test_rank_rule():
    assert choose_rank(2, 0.1) == 80
    assert critical_precision(1.0, 4) == 0.0
    assert choose_rank(2, 0.1, c_tilde=1.0, l1sq=2) == 80
    # 4 * 4 * (0.5 / (0.01 * 4) + 100) + 1
    assert choose_rank(4, 0.01, c_tilde=1.5, l1sq=4) == 1801
    with pytest.raises(InvalidArgument):
        choose_rank(2, 0.0)
    assert expected_trace(2.0, 10) == pytest.approx(1.1)


def test_c_tilde_anchors():
    m = magic_state_decomposition(math.pi)
    psi = DenseCache().sum(m)
    assert c_tilde(m, psi) == pytest.approx(1.0)
    d = plus_state_decomposition(["plus"] * 2)
    assert c_tilde(d, np.full(4, 0.5)) == pytest.approx(1.0)
