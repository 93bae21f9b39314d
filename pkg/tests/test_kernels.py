import numpy as np
import pytest
from hypothesis import given, strategies as st

from fgsim import kernels
from fgsim.gaussian_core import measure_probability, random_gaussian_state

BACKENDS = kernels.backends()
needs_compiled = pytest.mark.skipif("compiled" not in BACKENDS, reason="extension not built")


def test_dispatch_reports_backend():
    assert kernels.BACKEND in BACKENDS
    assert kernels.pfaffian is getattr(BACKENDS[kernels.BACKEND], "pfaffian")


def test_pfaffian_small_cases():
    py = BACKENDS["python"].pfaffian
    a = np.array([[0, 2.5], [-2.5, 0]])
    assert py(a) == pytest.approx(2.5)
    M = np.array([[0, 1, 2, 3], [-1, 0, 4, 5], [-2, -4, 0, 6], [-3, -5, -6, 0]], float)
    assert py(M) == pytest.approx(1 * 6 - 2 * 5 + 3 * 4)


@given(half=st.integers(1, 6), seed=st.integers(0, 10 ** 6))
def test_pfaffian_squares_to_determinant(half, seed):
    r = np.random.default_rng(seed)
    A = r.normal(size=(2 * half, 2 * half)) + 1j * r.normal(size=(2 * half, 2 * half))
    A = A - A.T
    pf = BACKENDS["python"].pfaffian(A)
    assert abs(pf ** 2 - np.linalg.det(A)) <= 1e-8 * max(1.0, abs(np.linalg.det(A)))


@needs_compiled
@given(n=st.integers(1, 8), seed=st.integers(0, 10 ** 6))
def test_backends_agree(n, seed):
    r = np.random.default_rng(seed)
    py, cy = BACKENDS["python"], BACKENDS["compiled"]
    a, b = random_gaussian_state(n, r), random_gaussian_state(n, r)
    g = np.asarray(a.cov, dtype=np.float64)
    M = r.normal(size=(2 * n, 2 * n)) + 1j * r.normal(size=(2 * n, 2 * n))
    M = M - M.T
    assert abs(py.pfaffian(M) - cy.pfaffian(M)) <= 1e-9 * max(1, abs(py.pfaffian(M)))
    j, k = sorted(r.choice(2 * n, 2, replace=False))
    assert np.allclose(py.rotate_pair(g, j, k, 0.7), cy.rotate_pair(g, j, k, 0.7), atol=1e-13)
    p0 = measure_probability(a, 0)
    m = 0 if p0 > 0.5 else 1
    assert np.allclose(py.project_cov(g, 0, m, max(p0, 1 - p0)),
                       cy.project_cov(g, 0, m, max(p0, 1 - p0)), atol=1e-12)
    args = (a.plus_space, b.plus_space, a.transition, b.transition,
            np.asarray(a.ref, dtype=np.int_), np.asarray(b.ref, dtype=np.int_),
            a.ref_amp / abs(a.amp), b.ref_amp / abs(b.amp), 1e-12)
    s1, v1 = py.overlap_kernel(*args)
    s2, v2 = cy.overlap_kernel(*args)
    assert s1 == s2 and abs(v1 - v2) <= 1e-10


@given(n=st.integers(1, 6), seed=st.integers(0, 10 ** 6))
def test_row_kernel_matches_single_calls(n, seed):
    r = np.random.default_rng(seed)
    a = random_gaussian_state(n, r)
    bs = [random_gaussian_state(n, r, bits=list(a.ref)) for _ in range(5)]
    stack = (np.array([b.plus_space for b in bs]), np.array([b.transition for b in bs]),
             np.array([b.ref for b in bs], dtype=np.int_),
             np.array([b.ref_amp / abs(b.amp) for b in bs]))
    head = (a.plus_space, a.transition, np.asarray(a.ref, dtype=np.int_), a.ref_amp / abs(a.amp))
    for impl in BACKENDS.values():
        status, vals = impl.overlap_row_kernel(*head, *stack, 1e-12)
        for i, b in enumerate(bs):
            s1, v1 = impl.overlap_kernel(head[0], b.plus_space, head[1], b.transition, head[2],
                                         stack[2][i], head[3], stack[3][i], 1e-12)
            assert status[i] == s1 and abs(vals[i] - v1) <= 1e-12
