import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from fgsim import oracle as O
from fgsim.decomp_unitary import magic_state_decomposition
from fgsim.errors import InvalidArgument
from fgsim.gaussian_core import prepare_basis_state, random_gaussian_state
from fgsim.norm_estimation import exact_norm, fast_norm
from fgsim.sparsify import SparseSuperposition, sparsify_state


def dense(sup):
    return sum(c * O.dense_state_from_gaussian(s) for c, s in sup.terms)


def test_exact_norm_simple_cases():
    one = SparseSuperposition(3, ((1.0, prepare_basis_state([0, 1, 0])),))
    assert exact_norm(one) == pytest.approx(1.0)
    two = SparseSuperposition(4, ((1.0, prepare_basis_state([0] * 4)),
                                  (1.0, prepare_basis_state([1] * 4))))
    assert exact_norm(two) == pytest.approx(2.0)


def test_exact_norm_of_sparsified_magic_state():
    sp = sparsify_state(magic_state_decomposition(2.1), 12, seed=8)
    v = dense(sp)
    assert abs(exact_norm(sp) - np.vdot(v, v).real) <= 1e-9


@given(n=st.integers(1, 4), m=st.integers(1, 5), seed=st.integers(0, 10 ** 6),
       scale=st.floats(0.1, 10.0))
def test_exact_norm_matches_dense_and_scales(n, m, seed, scale):
    r = np.random.default_rng(seed)
    terms = tuple((complex(*r.normal(size=2)), random_gaussian_state(n, r)) for _ in range(m))
    sup = SparseSuperposition(n, terms)
    v = dense(sup)
    assert exact_norm(sup) == pytest.approx(np.vdot(v, v).real, abs=1e-9, rel=1e-9)
    assert exact_norm(sup.scaled(scale)) == pytest.approx(scale ** 2 * exact_norm(sup),
                                                          rel=1e-9, abs=1e-12)


def test_fast_norm_single_term_is_exact():
    s = random_gaussian_state(3, np.random.default_rng(2))
    sup = SparseSuperposition(3, ((0.5j, s),))
    for eps in (0.5, 0.01):
        assert fast_norm(sup, eps, 0.1, seed=0).value == pytest.approx(0.25)


def test_fast_norm_orthogonal_pair():
    sup = SparseSuperposition(4, ((1.0, prepare_basis_state([0] * 4)),
                                  (1.0, prepare_basis_state([1] * 4))))
    inside = sum(1.9 <= fast_norm(sup, 0.05, 0.01, seed=s).value <= 2.1 for s in range(1000))
    assert inside >= 990


def test_fast_norm_determinism_and_arguments():
    sp = sparsify_state(magic_state_decomposition(1.0), 20, seed=3)
    assert fast_norm(sp, 0.1, 0.05, seed=9) == fast_norm(sp, 0.1, 0.05, seed=9)
    for eps, pf in [(0.0, 0.1), (1.5, 0.1), (0.1, 0.0), (0.1, 1.0)]:
        with pytest.raises(InvalidArgument):
            fast_norm(sp, eps, pf, seed=0)
