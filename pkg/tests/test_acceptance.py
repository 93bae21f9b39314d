"""One test per acceptance criterion.

Reference matrices here are written out with plain numpy (Pauli products and
explicit cos/sin forms) so they do not share code with the package's oracle.
"""

import math
import time

import numpy as np
import pytest

from fgsim import oracle as O
from fgsim import sampler as S
from fgsim import verify as V
from fgsim.decomp_channel import (adaptive_nzz_single_z, equimagical_noisy_rotation,
                                  general_dephasing_decomposition, mixture,
                                  naive_noisy_rotation)
from fgsim.decomp_unitary import (cphase_decomposition, decompose_two_qubit_fermionic,
                                  kak_fermionic, lift_gadget, magic_state_decomposition,
                                  optimal_unitary_decomposition, plus_state_decomposition,
                                  rzz_decomposition, swap_decomposition, with_gaussian, circuit)
from fgsim.gaussian_core import (GaussianGenerator, evolve, measure_probability, overlap,
                                 prepare_basis_state, project)
from fgsim.norm_estimation import exact_norm, fast_norm
from fgsim.sparsify import (SparseSuperposition, apply_pattern, c_tilde, c_tilde_adaptive,
                            expected_trace, sparsify_adaptive, trajectories, variance_bound)

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.diag([1, -1]).astype(complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
SWAP = np.eye(4)[[0, 2, 1, 3]].astype(complex)
PSI_PLUS = np.array([1, 0, 0, 1], dtype=complex) / math.sqrt(2)


def rot(P, th):
    return math.cos(th / 2) * np.eye(P.shape[0]) - 1j * math.sin(th / 2) * P


def cphase(th):
    return np.diag([1, 1, 1, np.exp(1j * th)])


def middle(K, n_side=1):
    """K on the middle qubits of a (1 + arity + 1)-qubit register."""
    side = np.eye(2 ** n_side)
    return np.kron(np.kron(side, K), side)


def choi(kraus):
    """Choi state with the map on the middle qubits of |psi+> pairs."""
    arity = int(round(math.log2(kraus[0][1].shape[0])))
    g = PSI_PLUS if arity == 1 else np.kron(PSI_PLUS, PSI_PLUS)
    if arity == 1:
        lift = lambda K: np.kron(I2, K)
    else:
        lift = middle
    return sum(w * np.outer(lift(K) @ g, (lift(K) @ g).conj()) for w, K in kraus)


def transfer(kraus):
    return sum(w * np.kron(K, K.conj()) for w, K in kraus)


def noisy_kraus(P, theta, p):
    R = rot(P, theta)
    return [(1 - p, R), (p, P @ R)]


# --------------------------------------------------------------------------
# 1
# --------------------------------------------------------------------------

def test_c1_covariance_backend_matches_dense_oracle():
    rng = np.random.default_rng(101)
    start = time.perf_counter()
    worst_prob = worst_phase = 0.0
    for _ in range(500):
        n = int(rng.integers(2, 11))
        steps = int(rng.integers(1, 201))
        bits = [int(b) for b in rng.integers(0, 2, n)]
        st = prepare_basis_state(bits)
        v = O.basis_vector(bits)
        for _ in range(steps):
            if rng.random() < 0.1:
                g = GaussianGenerator.majorana(int(rng.integers(2 * n)))
            else:
                j, k = rng.choice(2 * n, 2, replace=False)
                g = GaussianGenerator.rotation(int(j), int(k), float(rng.uniform(0, 2 * math.pi)))
            st = evolve(st, g)
            v = O.dense_apply_gaussian(v, g)
            q = int(rng.integers(n))
            keep = np.abs(v.reshape([2] * n).swapaxes(0, q).reshape(2, -1)) ** 2
            p0_dense = keep[0].sum() / keep.sum()
            worst_prob = max(worst_prob, abs(measure_probability(st, q) - p0_dense))
            if rng.random() < 0.05:
                m = 0 if p0_dense >= 0.5 else 1
                st = project(st, q, m)
                mask = ((np.arange(2 ** n) >> (n - 1 - q)) & 1) == m
                v = np.where(mask, v, 0)
        y = int(np.argmax(np.abs(v)))
        basis = prepare_basis_state([(y >> (n - 1 - i)) & 1 for i in range(n)])
        got, want = overlap(basis, st), v[y]
        worst_phase = max(worst_phase, abs(np.angle(got / want)))
        assert abs(abs(got) - abs(want)) <= 1e-8
    elapsed = time.perf_counter() - start
    assert worst_prob <= 1e-9
    assert worst_phase <= 1e-8
    assert elapsed <= 120


# --------------------------------------------------------------------------
# 2
# --------------------------------------------------------------------------

CATALOG = {
    "rzz": (lambda t: rot(np.kron(Z, Z), t), lambda t: 1 + abs(math.sin(t))),
    "cphase": (cphase, lambda t: 1 + abs(math.sin(t / 2))),
    "swap_nn": (lambda t: SWAP, lambda t: 2.0),
    "hadamard": (lambda t: H, lambda t: 2.0),
    "ry": (lambda t: rot(Y, t), lambda t: 1 + abs(math.sin(t))),
    "rx": (lambda t: rot(X, t), lambda t: 1 + abs(math.sin(t))),
}


@pytest.mark.parametrize("gate", sorted(CATALOG))
def test_c2_catalog_reconstruction_and_extent(gate):
    dense, extent = CATALOG[gate]
    angles = np.random.default_rng(202).uniform(-2 * math.pi, 2 * math.pi, 50)
    for th in angles:
        d = optimal_unitary_decomposition(gate, th if gate not in ("swap_nn", "hadamard") else None)
        assert np.max(np.abs(O.decomposition_matrix(d) - dense(th))) <= 1e-10
        assert abs(d.extent - extent(th)) <= 1e-10


# --------------------------------------------------------------------------
# 3
# --------------------------------------------------------------------------

def random_unitary(rng, d):
    q, r = np.linalg.qr(rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def parity_unitary(rng):
    U = np.zeros((4, 4), dtype=complex)
    U[np.ix_([0, 3], [0, 3])] = random_unitary(rng, 2)
    U[np.ix_([1, 2], [1, 2])] = random_unitary(rng, 2)
    return U


def seven_angle_matrix(p):
    A = np.kron(rot(Z, p.t1), rot(Z, p.t2))
    B = np.kron(rot(Z, p.t3), rot(Z, p.t4))
    return A @ rot(np.kron(X, X), p.a) @ rot(np.kron(Y, Y), p.b) @ rot(np.kron(Z, Z), p.c) @ B


def phase_free_distance(A, B):
    k = np.unravel_index(np.argmax(np.abs(B)), B.shape)
    ph = A[k] / B[k]
    return np.max(np.abs(A - ph / abs(ph) * B))


def test_c3_kak_round_trip():
    rng = np.random.default_rng(303)
    for _ in range(200):
        U = parity_unitary(rng)
        params, g = kak_fermionic(U)
        assert phase_free_distance(U, seven_angle_matrix(params)) <= 1e-9
        d = decompose_two_qubit_fermionic(U, "nearest")
        assert np.max(np.abs(O.decomposition_matrix(d) - U)) <= 1e-9
        assert d.optimal
        assert abs(d.extent_claim - (1 + abs(math.sin(params.c)))) <= 1e-12
        assert abs(d.extent - d.extent_claim) <= 1e-9
    for _ in range(50):
        U = np.diag(np.exp(1j * rng.uniform(0, 2 * math.pi, 4)))
        params, _ = kak_fermionic(U)
        d = decompose_two_qubit_fermionic(U, "nonadjacent", n=3, targets=(0, 2))
        assert d.optimal
        assert abs(d.extent_claim - (1 + abs(math.sin(params.c)))) <= 1e-12
        assert abs(d.extent - d.extent_claim) <= 1e-9
        assert np.max(np.abs(O.decomposition_matrix(d) - O.embed(U, (0, 2), 3))) <= 1e-9


# --------------------------------------------------------------------------
# 4
# --------------------------------------------------------------------------

def gadget_image(V):
    v = middle(V) @ np.kron(PSI_PLUS, PSI_PLUS)
    bra = PSI_PLUS.conj()[None, :]
    A = 4 * np.kron(np.kron(bra, np.eye(4)), bra)
    emb = np.stack([np.kron(np.kron(np.eye(2)[c >> 1], v), np.eye(2)[c & 1]) for c in range(4)],
                   axis=1)
    return A @ emb


def test_c4_lifting_gadget():
    cases = [(cphase(th), cphase_decomposition(th)) for th in np.linspace(0.1, 6.2, 20)]
    cases += [(rot(np.kron(Z, Z), th), rzz_decomposition(th)) for th in np.linspace(-3.0, 3.0, 20)]
    cases.append((SWAP, swap_decomposition()))
    for V_, dec in cases:
        assert np.max(np.abs(gadget_image(V_) - V_)) <= 1e-10
        rep = lift_gadget(V_, decomposition=dec)
        assert rep.error <= 1e-10
        assert rep.lifted_error <= 1e-10
        assert abs(rep.lifted.l1_norm - dec.l1_norm) <= 1e-12


# --------------------------------------------------------------------------
# 5 and 6
# --------------------------------------------------------------------------

THETAS = np.linspace(0.1, 2 * math.pi - 0.1, 20)
PS = np.linspace(0.0, 0.5, 10)
GRID = [(float(t), float(p)) for t in THETAS for p in PS]


def test_c5_noisy_channel_equalities_and_cost_order():
    ZZ = np.kron(Z, Z)
    for th, p in GRID:
        s = abs(math.sin(th))
        for label, P in (("Y", Y), ("ZZ", ZZ)):
            T_def = transfer(noisy_kraus(P, th, p))
            for ch in (naive_noisy_rotation(label, th, p), equimagical_noisy_rotation(label, th, p)):
                assert np.max(np.abs(O.channel_transfer_matrix(ch) - T_def)) <= 1e-10
            eq, nv = equimagical_noisy_rotation(label, th, p), naive_noisy_rotation(label, th, p)
            assert eq.cost <= nv.cost + 1e-12
            assert abs(eq.cost - (1 + (1 - 2 * p) * s)) <= 1e-10
        R = rot(ZZ, th)
        for noisy, Zq in (("first", np.kron(Z, I2)), ("second", np.kron(I2, Z))):
            ad = adaptive_nzz_single_z(th, p, noisy)
            want = choi([(1 - p, R), (p, Zq @ R)])
            assert np.max(np.abs(O.channel_choi_state(ad) - want)) <= 1e-10
            naive = naive_noisy_rotation("ZZ", th, p, "ZI" if noisy == "first" else "IZ")
            assert ad.cost <= naive.cost + 1e-12
        general = [(1 - p, R)] + [(p / 3, Q @ R) for Q in (np.kron(Z, I2), np.kron(I2, Z), ZZ)]
        adaptive = general_dephasing_decomposition(th, p, allow_adaptive=True)
        plain = general_dephasing_decomposition(th, p)
        naive = mixture([naive_noisy_rotation("ZZ", th, p, q) for q in ("ZI", "IZ", "ZZ")],
                        [1 / 3] * 3)
        for ch in (adaptive, plain, naive):
            assert np.max(np.abs(O.channel_choi_state(ch) - choi(general))) <= 1e-10
        assert adaptive.cost <= plain.cost + 1e-12 <= naive.cost + 2e-12
        assert abs(naive.cost - (1 + s)) <= 1e-10


def test_c6_witness_values_and_sampled_validity():
    ZZ = np.kron(Z, Z)
    zero = np.diag([1, 0]).astype(complex)
    for th, p in GRID:
        want = 1 + (1 - 2 * p) * abs(math.sin(th))
        rho_y = sum(w * K @ zero @ K.conj().T for w, K in noisy_kraus(Y, th, p))
        got_y = V.dyadic_witness_value(V.dyad(V.y_witness_for(th)), rho_y)
        assert abs(got_y - want) <= 1e-9
        rho_zz = choi(noisy_kraus(ZZ, th, p))
        got_zz = V.dyadic_witness_value(V.dyad(V.zz_witness_for(th)), rho_zz)
        assert abs(got_zz - want) <= 1e-9
    witnesses = [V.single_qubit_witness(0.0), V.single_qubit_witness(math.pi),
                 V.zz_witness(1), V.zz_witness(-1)]
    for i, w in enumerate(witnesses):
        rep = V.extent_witness_check(w, w / np.linalg.norm(w), gaussian_samples=10_000, seed=i)
        assert rep.samples == 10_000
        assert rep.validity, rep.max_gaussian_overlap


# --------------------------------------------------------------------------
# 7
# --------------------------------------------------------------------------

def dense_sum(decomp):
    return sum(c * O.dense_state_from_gaussian(s) for c, s in decomp.terms)


def test_c7_c_tilde_anchors():
    m = magic_state_decomposition(math.pi)
    assert abs(c_tilde(m, dense_sum(m)) - 1.0) <= 1e-12
    for t in range(1, 7):
        d = plus_state_decomposition(["plus"] * t)
        plus = np.full(2 ** t, 2 ** (-t / 2), dtype=complex)
        assert abs(c_tilde(d, plus) - 1.0) <= 1e-12
    for th in np.linspace(0.2, 6.0, 15):
        m = magic_state_decomposition(th)
        psi = np.zeros(16, dtype=complex)
        psi[[0b0000, 0b0011, 0b1100]] = 0.5
        psi[0b1111] = 0.5 * np.exp(1j * th)
        xi = 1 + abs(math.sin(th / 2))
        closed = math.sqrt(xi) * (abs(math.sin(th / 4)) ** 3 + abs(math.cos(th / 4)) ** 3)
        assert abs(c_tilde(m, psi) - closed) <= 1e-10


# --------------------------------------------------------------------------
# 8
# --------------------------------------------------------------------------

def _ensemble_case(skeleton, n):
    """Dense vectors per (trajectory, gate-choice combination) and exact outputs."""
    unitary = [el for el in skeleton if hasattr(el, "terms")]
    ranks = tuple(len(d.terms) for d in unitary)
    combos = list(np.ndindex(*ranks))
    trajs = trajectories(sparsify_adaptive(skeleton, 1, 0))
    zero = O.basis_vector([0] * n)
    phi = {}
    for m in trajs:
        rows = []
        for combo in combos:
            v, t, a = zero, 0, 0
            for el in skeleton:
                if hasattr(el, "terms"):
                    v = O.dense_gaussian_unitary(el.terms[combo[t]][1]) @ v
                    t += 1
                else:
                    (q, out), circ = el.kraus[m[a]]
                    v = O.dense_gaussian_unitary(circ) @ (O.projector(q, out, n) @ v)
                    a += 1
            rows.append(v)
        phi[m] = np.array(rows)
    coeff = np.array([np.prod([unitary[t].terms[c][0] for t, c in enumerate(combo)])
                      for combo in combos])
    psi = {m: coeff @ phi[m] for m in trajs}
    return ranks, coeff, trajs, phi, psi


def _ensemble_statistics(skeleton, n, k, seeds):
    ranks, coeff, trajs, phi, psi = _ensemble_case(skeleton, n)
    rho_exact = sum(np.outer(psi[m], psi[m].conj()) for m in trajs)
    assert abs(np.trace(rho_exact).real - 1) <= 1e-10
    l1 = float(np.abs(coeff).sum())
    C = c_tilde_adaptive(np.abs(coeff), [[np.vdot(psi[m], phi[m][w]) for m in trajs]
                                         for w in range(len(coeff))])
    # the dense shortcut must agree with the package's own trajectory evolution
    pat = sparsify_adaptive(skeleton, k, 0)
    traces, rho1 = [], np.zeros_like(rho_exact)
    for seed in range(seeds):
        pat = sparsify_adaptive(skeleton, k, seed)
        idx = np.ravel_multi_index(pat.gate_choices.T, ranks)
        w = (np.bincount(idx, pat.phases.real, len(coeff))
             + 1j * np.bincount(idx, pat.phases.imag, len(coeff))) * pat.global_scale
        vs = [w @ phi[m] for m in trajs]
        if seed == 0:
            for m, v in zip(trajs, vs):
                lib = dense_sum(apply_pattern(pat, prepare_basis_state([0] * n), m))
                assert np.max(np.abs(lib - v)) <= 1e-10
        omega = sum(np.outer(v, v.conj()) for v in vs)
        tr = float(np.trace(omega).real)
        traces.append(tr)
        rho1 += omega / tr
    return np.array(traces), rho1 / seeds, rho_exact, l1 ** 2, C


def _c8_cases():
    g = GaussianGenerator.matchgate
    prep = circuit(4, [g("rxy", (0, 1), 0.7), g("rxx", (1, 2), 1.1), g("rz", (2,), 0.4),
                       g("ryy", (2, 3), 0.9)])
    mid = circuit(4, [g("rxx", (0, 1), 0.5), g("rxy", (2, 3), 1.3)])
    unitary_only = [with_gaussian(rzz_decomposition(math.pi / 3, (0, 1), 4), before=prep),
                    with_gaussian(rzz_decomposition(1.0, (1, 2), 4), after=mid),
                    cphase_decomposition(2.0, (2, 3), 4)]
    kraus = adaptive_nzz_single_z(0.8, 0.5, "first", (1, 2), 4).branches[0].adaptive
    adaptive = [with_gaussian(rzz_decomposition(math.pi / 2, (0, 1), 4), before=prep), kraus,
                with_gaussian(rzz_decomposition(0.7, (2, 3), 4), before=mid),
                rzz_decomposition(1.2, (0, 3), 4)]
    return [(unitary_only, 8), (unitary_only, 32), (adaptive, 16)]


@pytest.mark.slow
def test_c8_sparsification_statistics():
    start = time.perf_counter()
    seeds = 10_000
    for skeleton, k in _c8_cases():
        traces, rho1, rho_exact, l1sq, C = _ensemble_statistics(skeleton, 4, k, seeds)
        mean, var = traces.mean(), traces.var(ddof=1)
        assert abs(mean - expected_trace(l1sq, k)) <= 3 * math.sqrt(var / seeds)
        assert var <= variance_bound(C, l1sq, k)
        dist = O.trace_distance(rho1, rho_exact)
        assert dist <= 2 * l1sq / k + math.sqrt(var)
    assert time.perf_counter() - start <= 600


# --------------------------------------------------------------------------
# 9
# --------------------------------------------------------------------------

def _random_superposition(rng):
    from fgsim.gaussian_core import random_gaussian_state
    while True:
        n = int(rng.integers(2, 6))
        m = int(rng.integers(2, 9))
        c = rng.normal(size=m) + 1j * rng.normal(size=m)
        c /= np.abs(c).sum()
        sup = SparseSuperposition(n, tuple((complex(ci), random_gaussian_state(n, rng))
                                           for ci in c))
        if exact_norm(sup) >= 0.1:
            return sup


@pytest.mark.slow
def test_c9_fast_norm_contract():
    rng = np.random.default_rng(909)
    eps, p_fail = 0.05, 0.01
    runs = misses = 0
    for inst in range(100):
        sup = _random_superposition(rng)
        exact = exact_norm(sup)
        for seed in range(10):
            est = fast_norm(sup, eps, p_fail, seed=(inst, seed))
            runs += 1
            misses += abs(est.value - exact) > eps * exact
    assert runs == 1000
    assert misses / runs <= p_fail


# --------------------------------------------------------------------------
# 10
# --------------------------------------------------------------------------

# Born distributions from explicit 16x16 Pauli-exponential products, frozen
BORN_RZZ = {"0000": 0.26315032966785573, "0011": 0.11245812192155094,
            "0101": 0.005642265011038449, "0110": 0.4233186518180786,
            "1001": 7.450588818046896e-05, "1010": 0.14871403020125185,
            "1100": 0.028866663158445584, "1111": 0.01777543233359821}
BORN_NOISY = {"0000": 0.26227996006169796, "0011": 0.10632718003900869,
              "0101": 0.006999626105776371, "0110": 0.4452479209134064,
              "1001": 0.003077700907372532, "1010": 0.09996792780171458,
              "1100": 0.056553866068812776, "1111": 0.019545818102210465}


def _c10_program(extra):
    g = S.make_gate
    return S.CircuitProgram(4, [
        g("rxx_nn", (0, 1), (0.4,)), g("ryy_nn", (1, 2), (0.9,)), g("rz", (2,), (1.3,)),
        g("rxy_nn", (2, 3), (0.6,)), g("rzz", (0, 2), (math.pi / 3,)), g("rxx_nn", (1, 2), (1.1,)),
        g("rz", (0,), (0.5,)), g("ryy_nn", (2, 3), (0.3,)), extra, g("rxx_nn", (0, 1), (0.8,)),
        g("rxy_nn", (1, 2), (0.2,)), S.TerminalMeasure((0, 1, 2, 3))])


def _tvd(counts, ref, shots):
    return S.total_variation({k: v / shots for k, v in counts.items()}, ref)


@pytest.mark.slow
def test_c10_end_to_end_sampling():
    start = time.perf_counter()
    shots = 100_000
    clean = _c10_program(S.make_gate("rzz", (1, 3), (math.pi / 3,)))
    noisy = _c10_program(S.make_channel("noisy_rzz", math.pi / 3, 0.5, (1, 3), noise="z1",
                                        adaptive=True))
    assert S.total_variation(S.dense_distribution(clean), BORN_RZZ) <= 1e-12
    assert S.total_variation(S.dense_distribution(noisy), BORN_NOISY) <= 1e-12
    exact = S.Sampler(clean, "exact", seed=1).counts(shots)
    assert _tvd(exact, BORN_RZZ, shots) <= 0.01
    approx = S.Sampler(clean, "approx", seed=1, delta_total=0.1, reuse=20).counts(shots)
    assert _tvd(approx, BORN_RZZ, shots) <= 0.12
    adaptive = S.Sampler(noisy, "adaptive", seed=1, delta_total=0.1, reuse=20).counts(shots)
    assert _tvd(adaptive, BORN_NOISY, shots) <= 0.05
    assert time.perf_counter() - start <= 900


# --------------------------------------------------------------------------
# 11
# --------------------------------------------------------------------------

@pytest.mark.slow
def test_c11_runtime_linear_in_extent():
    g = S.make_gate
    pairs = [(0, 1), (2, 3), (1, 2), (0, 2), (1, 3), (0, 3)]
    per_extent = []
    for t in range(1, 7):
        els = [g("rxx_nn", (0, 1), (0.7,)), g("ryy_nn", (2, 3), (0.4,)), g("rxy_nn", (1, 2), (1.1,))]
        for i in range(t):
            els += [g("rzz", pairs[i], (math.pi / 2,)), g("rxx_nn", (1, 2), (0.3 + 0.1 * i,))]
        prog = S.CircuitProgram(4, els)
        times = []
        for rep in range(3):
            t0 = time.perf_counter()
            r = S.sample_approx(prog, delta_total=0.3, seed=rep)
            times.append(time.perf_counter() - t0)
        assert r.E == pytest.approx(2.0 ** t)
        per_extent.append(min(times) / 2 ** t)
    # some c has every time in [c 2^t / 2, 2 c 2^t]
    assert max(per_extent) / min(per_extent) <= 4.0


# --------------------------------------------------------------------------
# 12
# --------------------------------------------------------------------------

def test_c12_z_twirl():
    rng = np.random.default_rng(1212)
    for _ in range(50):
        U = np.diag(np.exp(1j * rng.uniform(0, 2 * math.pi, 4)))
        is_diag, defect = V.z_twirl_trace_check(U)
        assert is_diag and defect <= 1e-12
    others = [SWAP, np.kron(H, I2)] + [random_unitary(rng, 4) for _ in range(50)]
    for U in others:
        is_diag, defect = V.z_twirl_trace_check(U)
        assert not is_diag and defect > 1e-3
