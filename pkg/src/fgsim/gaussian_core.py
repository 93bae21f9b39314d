"""Phase-tracked pure fermionic Gaussian states on qubits.

Majorana operators follow the Jordan-Wigner convention with 0-based indices::

    c[2q]   = Z...Z X_q I...I
    c[2q+1] = Z...Z Y_q I...I

so that ``c[2q] c[2q+1] = i Z_q``.  The covariance matrix is
``gamma[j, k] = -i <c_j c_k>`` for ``j != k``, which makes the probability of
reading 0 on qubit ``q`` equal to ``(1 + gamma[2q, 2q+1]) / 2``.

A state stores, besides ``gamma``, a reference bit string ``x`` with
non-negligible weight and a complex amplitude ``amp`` fixed by

    <x|psi> = amp * sqrt(ref_prob),    ref_prob = |<x|psi>|^2 / |amp|^2.

``|amp|`` is the norm of the (possibly subnormalised) vector.  Amplitudes on
other basis states, and on states acted on by Majorana monomials, follow from
Wick's theorem applied to the transition matrix ``<x|c_j c_k|psi> / <x|psi>``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from . import kernels
from .errors import InvalidArgument, InvalidState

#: keep the current reference after a rotation while its weight stays above this
REF_KEEP = 1e-2
#: outcome probabilities below this are treated as exactly zero
PROB_FLOOR = 1e-12
#: relative overlap magnitudes below this are reported as exactly zero
OVERLAP_FLOOR = 1e-12

_PAULI_1Q = {"I", "X", "Y", "Z"}


# --------------------------------------------------------------------------
# generators and circuits
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class GaussianGenerator:
    """One Gaussian gate.

    ``kind`` is ``"rotation"`` (``exp(theta/2 c_j c_k)``), ``"majorana"``
    (the unitary ``c_j``) or ``"matchgate"`` (a named gate from
    :data:`MATCHGATES` acting on ``qubits`` with ``params``).
    """

    kind: str
    j: int = -1
    k: int = -1
    theta: float = 0.0
    name: str = ""
    qubits: tuple = ()
    params: tuple = ()

    @staticmethod
    def rotation(j, k, theta):
        j, k = int(j), int(k)
        if j == k:
            raise InvalidArgument("rotation needs two distinct Majorana indices")
        return GaussianGenerator("rotation", j=j, k=k, theta=float(theta))

    @staticmethod
    def majorana(j):
        return GaussianGenerator("majorana", j=int(j))

    @staticmethod
    def matchgate(name, qubits, *params):
        if name not in MATCHGATES:
            raise InvalidArgument(f"unknown matchgate id {name!r}")
        return GaussianGenerator("matchgate", name=name,
                                 qubits=tuple(int(q) for q in qubits),
                                 params=tuple(params))


@dataclass(frozen=True)
class GaussianCircuit:
    """Ordered Gaussian gates with a global phase and optional compiled rotation.

    ``compiled_R`` satisfies ``gamma -> R gamma R^T`` for the whole circuit.
    """

    n: int
    gates: tuple = ()
    phase: complex = 1.0 + 0j
    compiled_R: np.ndarray | None = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))

    def then(self, other: "GaussianCircuit") -> "GaussianCircuit":
        """Circuit applying ``self`` first and ``other`` second."""
        if other.n != self.n:
            raise InvalidArgument("circuit sizes differ")
        return GaussianCircuit(self.n, self.gates + other.gates,
                               self.phase * other.phase)

    def scaled(self, phase) -> "GaussianCircuit":
        return GaussianCircuit(self.n, self.gates, self.phase * phase)


def pauli_to_majorana(label: str, qubits: Sequence[int]):
    """Write a Pauli string as ``phase * c_{i1} c_{i2} ...`` (indices ascending).

    ``label[t]`` acts on ``qubits[t]``.  Returns ``(phase, indices)``.
    """
    if len(label) != len(qubits):
        raise InvalidArgument("Pauli label and qubit list differ in length")
    if len(set(qubits)) != len(qubits):
        raise InvalidArgument("repeated qubit in Pauli string")
    phase = 1.0 + 0j
    seq = []
    # P_q = Z_0..Z_{q-1} * (Majorana monomial on mode q); Z_p = -i c_{2p} c_{2p+1}
    for p, q in sorted(zip(label.upper(), qubits), key=lambda t: t[1]):
        if p not in _PAULI_1Q:
            raise InvalidArgument(f"bad Pauli letter {p!r}")
        if p == "I":
            continue
        if p == "Z":
            phase *= -1j
            seq += [2 * q, 2 * q + 1]
            continue
        # X_q = (Z_0...Z_{q-1}) c_{2q}, Y_q = (Z_0...Z_{q-1}) c_{2q+1}
        for r in range(q):
            phase *= -1j
            seq += [2 * r, 2 * r + 1]
        seq.append(2 * q if p == "X" else 2 * q + 1)
    sign, idx = reduce_monomial(seq)
    return phase * sign, idx


def reduce_monomial(seq):
    """Bring a product of Majoranas to ascending order.

    Returns ``(sign, indices)`` with repeated pairs cancelled (``c_j^2 = 1``).
    """
    seq = list(seq)
    inv = 0
    for a in range(len(seq)):
        for b in range(a + 1, len(seq)):
            if seq[a] > seq[b]:
                inv += 1
    counts = {}
    for s in seq:
        counts[s] = counts.get(s, 0) + 1
    idx = tuple(sorted(s for s, c in counts.items() if c % 2))
    return (-1.0 if inv % 2 else 1.0), idx


def _pauli_rotation(label, qubits, theta):
    """R_P(theta) = exp(-i theta/2 P) for a Pauli that is a Majorana bilinear."""
    phase, idx = pauli_to_majorana(label, qubits)
    if len(idx) != 2:
        raise InvalidArgument(f"R_{label} on {tuple(qubits)} is not Gaussian")
    # P = phase c_j c_k with phase = +-i, so -i theta/2 P = (-i phase) theta/2 c_j c_k
    s = (-1j * phase).real
    return GaussianGenerator.rotation(idx[0], idx[1], s * theta)


def _nn(qubits, name):
    if len(qubits) != 2 or qubits[1] != qubits[0] + 1:
        raise InvalidArgument(f"{name} needs Jordan-Wigner adjacent qubits (q, q+1)")


def _expand_matchgate(gen):
    """Primitive generators and phase for a named matchgate."""
    name, qs, ps = gen.name, gen.qubits, gen.params
    if name == "pauli":
        (label,) = ps
        phase, idx = pauli_to_majorana(label, qs)
        # the rightmost factor of the monomial acts first
        return phase, [GaussianGenerator.majorana(j) for j in reversed(idx)]
    if name in ("x", "y", "z"):
        return _expand_matchgate(GaussianGenerator("matchgate", name="pauli",
                                                   qubits=qs, params=(name.upper(),)))
    if name == "rz":
        return 1.0 + 0j, [_pauli_rotation("Z", qs, ps[0])]
    if name == "pauli_rot":
        label, theta = ps
        return 1.0 + 0j, [_pauli_rotation(label, qs, theta)]
    if name in ("rxx", "ryy", "rxy", "ryx"):
        _nn(qs, name)
        return 1.0 + 0j, [_pauli_rotation(name[1:].upper(), qs, ps[0])]
    if name == "fswap":
        _nn(qs, name)
        q0, q1 = qs
        gens = [_pauli_rotation("YY", qs, math.pi / 2),
                _pauli_rotation("XX", qs, math.pi / 2),
                _pauli_rotation("Z", (q0,), math.pi / 2),
                _pauli_rotation("Z", (q1,), math.pi / 2)]
        return 1j, gens
    raise InvalidArgument(f"unknown matchgate id {name!r}")


#: named matchgates understood by :meth:`GaussianGenerator.matchgate`
MATCHGATES = ("pauli", "x", "y", "z", "rz", "pauli_rot", "rxx", "ryy", "rxy", "ryx",
              "fswap")


def primitive_gates(gen: GaussianGenerator):
    """Return ``(phase, [rotation/majorana generators])`` for any generator."""
    if gen.kind == "matchgate":
        return _expand_matchgate(gen)
    if gen.kind in ("rotation", "majorana"):
        return 1.0 + 0j, [gen]
    raise InvalidArgument(f"unknown generator kind {gen.kind!r}")


def generator_rotation(gen: GaussianGenerator, n: int) -> np.ndarray:
    """Orthogonal R with gamma -> R gamma R^T for a single generator."""
    _check_generator(gen, n)
    R = np.eye(2 * n)
    for g in primitive_gates(gen)[1]:
        R = _primitive_rotation(g, n) @ R
    return R


def _primitive_rotation(g, n):
    R = np.eye(2 * n)
    if g.kind == "rotation":
        c, s = math.cos(g.theta), math.sin(g.theta)
        R[g.j, g.j] = c
        R[g.k, g.k] = c
        R[g.j, g.k] = s
        R[g.k, g.j] = -s
    else:
        R = -R
        R[g.j, g.j] = 1.0
    return R


def _check_generator(gen, n):
    if gen.kind == "matchgate":
        if any(q < 0 or q >= n for q in gen.qubits):
            raise InvalidArgument(f"qubit index out of range for n={n}")
        primitive_gates(gen)
        return
    for idx in (gen.j, gen.k) if gen.kind == "rotation" else (gen.j,):
        if idx < 0 or idx >= 2 * n:
            raise InvalidArgument(f"Majorana index {idx} out of range for n={n}")


def compile_gaussian_circuit(circ: GaussianCircuit) -> GaussianCircuit:
    """Fill ``compiled_R`` with the product of the per-gate rotations."""
    if circ.compiled_R is not None:
        return circ
    R = np.eye(2 * circ.n)
    for g in circ.gates:
        R = generator_rotation(g, circ.n) @ R
    return GaussianCircuit(circ.n, circ.gates, circ.phase, R)


# --------------------------------------------------------------------------
# states
# --------------------------------------------------------------------------

def _basis_cov(bits):
    n = len(bits)
    g = np.zeros((2 * n, 2 * n))
    for q, b in enumerate(bits):
        s = -1.0 if b else 1.0
        g[2 * q, 2 * q + 1] = s
        g[2 * q + 1, 2 * q] = -s
    return g


def _basis_plus_space(bits):
    """Orthonormal basis of the +i eigenspace of a basis-state covariance."""
    n = len(bits)
    B = np.zeros((2 * n, n), dtype=np.complex128)
    r = 1.0 / math.sqrt(2.0)
    for q, b in enumerate(bits):
        B[2 * q, q] = r
        B[2 * q + 1, q] = 1j * r * (-1.0 if b else 1.0)
    return B


def _plus_space(gamma):
    n = gamma.shape[0] // 2
    w, v = np.linalg.eigh(1j * gamma)
    return np.ascontiguousarray(v[:, :n])


def _ref_overlap_det(bits, B):
    """det(B_x^H B) whose modulus is |<x|psi_hat>|^2."""
    n = len(bits)
    rows = np.empty((n, n), dtype=np.complex128)
    r = 1.0 / math.sqrt(2.0)
    for q, b in enumerate(bits):
        s = -1.0 if b else 1.0
        rows[q] = r * (B[2 * q] - 1j * s * B[2 * q + 1])
    return np.linalg.det(rows)


@dataclass(frozen=True, eq=False)
class PhasedGaussianState:
    """Pure Gaussian state with tracked global amplitude.

    Immutable; every operation returns a new instance.
    """

    n: int
    cov: np.ndarray
    amp: complex
    ref: tuple
    ref_prob: float

    def __post_init__(self):
        self.cov.setflags(write=False)

    @property
    def annihilated(self) -> bool:
        return self.amp == 0

    @property
    def parity(self) -> int:
        """+1 for even, -1 for odd Z-string parity."""
        return -1 if sum(self.ref) % 2 else 1

    @property
    def norm(self) -> float:
        return abs(self.amp)

    @property
    def ref_amp(self) -> complex:
        """<ref|psi> including the amplitude."""
        return self.amp * math.sqrt(self.ref_prob)

    @cached_property
    def plus_space(self) -> np.ndarray:
        return _plus_space(np.asarray(self.cov))

    @cached_property
    def transition(self) -> np.ndarray:
        """G[j, k] = <ref|c_j c_k|psi> / <ref|psi>."""
        return _transition(_basis_plus_space(self.ref), self.plus_space)

    def scaled(self, factor) -> "PhasedGaussianState":
        """Same Gaussian state with the amplitude multiplied by ``factor``."""
        out = PhasedGaussianState(self.n, self.cov, self.amp * complex(factor),
                                  self.ref, self.ref_prob)
        _share_cache(self, out)
        return out


def _share_cache(src, dst):
    for key in ("plus_space", "transition"):
        if key in src.__dict__:
            dst.__dict__[key] = src.__dict__[key]


def _transition(Ba, Bb):
    """Transition matrix <a|c_j c_k|b>/<a|b> from +i eigenspace bases."""
    C = Ba.conj().T @ Bb
    P = Bb @ np.linalg.solve(C, Ba.conj().T)
    return 2.0 * P.T


def _make_state(gamma, amp_with_phase, norm, ref, plus=None):
    """Build a state whose reference amplitude has the phase of ``amp_with_phase``."""
    gamma = np.asarray(gamma, dtype=np.float64)
    n = gamma.shape[0] // 2
    B = _plus_space(gamma) if plus is None else plus
    p = abs(_ref_overlap_det(ref, B))
    ph = amp_with_phase / abs(amp_with_phase)
    st = PhasedGaussianState(n, gamma, complex(norm * ph), tuple(ref), float(p))
    st.__dict__["plus_space"] = B
    return st


def prepare_basis_state(bits) -> PhasedGaussianState:
    """|bits> with amplitude 1; ``bits`` is a 0/1 sequence or a string."""
    if isinstance(bits, str):
        if any(ch not in "01" for ch in bits):
            raise InvalidArgument("bit string must contain only 0 and 1")
        bits = [int(ch) for ch in bits]
    bits = tuple(int(b) for b in bits)
    if len(bits) == 0:
        raise InvalidArgument("empty bit string")
    if any(b not in (0, 1) for b in bits):
        raise InvalidArgument("bits must be 0 or 1")
    st = PhasedGaussianState(len(bits), _basis_cov(bits), 1.0 + 0j, bits, 1.0)
    st.__dict__["plus_space"] = _basis_plus_space(bits)
    return st


def annihilated_state(state: PhasedGaussianState) -> PhasedGaussianState:
    return PhasedGaussianState(state.n, state.cov, 0j, state.ref, state.ref_prob)


def measure_probability(state: PhasedGaussianState, qubit: int) -> float:
    """Probability of outcome 0 on ``qubit`` (normalised, ignores ``amp``)."""
    _check_qubit(state, qubit)
    if state.annihilated:
        raise InvalidState("annihilated state has no outcome distribution")
    p = 0.5 * (1.0 + state.cov[2 * qubit, 2 * qubit + 1])
    return min(1.0, max(0.0, p))


def _check_qubit(state, q):
    if not 0 <= q < state.n:
        raise InvalidArgument(f"qubit {q} out of range for n={state.n}")


def greedy_reference(gamma) -> tuple:
    """Bit string picked qubit by qubit along the more likely outcome.

    Its probability is at least 2^-n.
    """
    g = np.asarray(gamma, dtype=np.float64)
    n = g.shape[0] // 2
    bits = []
    for q in range(n):
        p0 = 0.5 * (1.0 + g[2 * q, 2 * q + 1])
        m = 0 if p0 >= 0.5 else 1
        p = p0 if m == 0 else 1.0 - p0
        if q < n - 1:
            g = kernels.project_cov(g, q, m, p)
        bits.append(m)
    return tuple(bits)


def _flip_sign(bits, q):
    return -1.0 if sum(bits[:q]) % 2 else 1.0


def _monomial_to_basis(x, y):
    """(lambda, seq) with <y| = lambda <x| c_seq for basis states x, y."""
    lam = 1.0
    cur = list(x)
    seq = []
    for q in range(len(x)):
        if x[q] != y[q]:
            lam *= _flip_sign(cur, q)
            cur[q] ^= 1
            seq.append(2 * q)
    return lam, seq


def _wick(G, seq):
    """<ref|c_seq|psi>/<ref|psi> for an arbitrary Majorana word ``seq``."""
    sign, idx = reduce_monomial(seq)
    if len(idx) % 2:
        return 0j
    if not idx:
        return complex(sign)
    ix = np.asarray(idx)
    K = G[np.ix_(ix, ix)]
    return sign * kernels.pfaffian(0.5 * (K - K.T))


def word_amplitude(state: PhasedGaussianState, bits, seq=()) -> complex:
    """<bits| c_seq |psi>, with ``seq`` applied right-to-left as written."""
    if state.annihilated:
        return 0j
    y = tuple(int(b) for b in bits)
    lam, pre = _monomial_to_basis(state.ref, y)
    return lam * state.ref_amp * _wick(state.transition, pre + list(seq))


def amplitude(state: PhasedGaussianState, bits) -> complex:
    """<bits|psi>."""
    if len(bits) != state.n:
        raise InvalidArgument("bit string length differs from n")
    return word_amplitude(state, bits)


def _majorana_action(bits, j):
    """c_j |bits> = mu |bits'>; returns (mu, bits')."""
    q = j // 2
    mu = _flip_sign(bits, q)
    if j % 2:
        mu *= 1j if bits[q] == 0 else -1j
    out = list(bits)
    out[q] ^= 1
    return mu, tuple(out)


def _evolve_primitive(state, g):
    n = state.n
    if g.kind == "majorana":
        j = g.j
        D = np.full(2 * n, -1.0)
        D[j] = 1.0
        gamma = state.cov * D[:, None] * D[None, :]
        q = j // 2
        new_ref = list(state.ref)
        new_ref[q] ^= 1
        new_ref = tuple(new_ref)
        mu, back = _majorana_action(new_ref, j)
        # <x'|c_j psi> = conj(mu) <x|psi>
        out = PhasedGaussianState(n, gamma, state.amp * np.conj(mu), new_ref, state.ref_prob)
        out.__dict__["plus_space"] = D[:, None] * state.plus_space
        return out
    j, k, th = g.j, g.k, g.theta
    if th == 0.0:
        return state
    gamma = kernels.rotate_pair(state.cov, j, k, th)
    c, s = math.cos(th / 2), math.sin(th / 2)
    G = state.transition
    new_ref_amp = state.ref_amp * (c + s * G[j, k])
    norm = abs(state.amp)
    if abs(new_ref_amp) ** 2 >= REF_KEEP * norm ** 2:
        return _make_state(gamma, new_ref_amp, norm, state.ref)
    y = greedy_reference(gamma)
    val = c * word_amplitude(state, y) + s * word_amplitude(state, y, (j, k))
    return _make_state(gamma, val, norm, y)


def evolve(state: PhasedGaussianState, gen: GaussianGenerator) -> PhasedGaussianState:
    """Apply one Gaussian generator, tracking the global phase."""
    _check_generator(gen, state.n)
    if state.annihilated:
        return state
    phase, prims = primitive_gates(gen)
    out = state
    for g in prims:
        out = _evolve_primitive(out, g)
    if phase != 1:
        out = out.scaled(phase)
    return out


def apply_circuit(state: PhasedGaussianState, circ: GaussianCircuit) -> PhasedGaussianState:
    """Apply every gate of ``circ`` in order, then its global phase."""
    if circ.n != state.n:
        raise InvalidArgument("circuit and state sizes differ")
    out = state
    for g in circ.gates:
        out = evolve(out, g)
    if circ.phase != 1:
        out = out.scaled(circ.phase)
    return out


def project(state: PhasedGaussianState, qubit: int, outcome: int) -> PhasedGaussianState:
    """Unnormalised post-measurement state Pi_q(outcome)|psi>."""
    _check_qubit(state, qubit)
    if outcome not in (0, 1):
        raise InvalidArgument("outcome must be 0 or 1")
    if state.annihilated:
        return state
    p0 = measure_probability(state, qubit)
    p = p0 if outcome == 0 else 1.0 - p0
    if p < PROB_FLOOR:
        return annihilated_state(state)
    if p > 1.0 - PROB_FLOOR:
        return state
    gamma = kernels.project_cov(state.cov, qubit, outcome, p)
    norm = abs(state.amp) * math.sqrt(p)
    if state.ref[qubit] == outcome:
        return _make_state(gamma, state.ref_amp, norm, state.ref)
    y = greedy_reference(gamma)
    amp = word_amplitude(state, y)
    if amp == 0:
        # outcome weight was rounding noise
        return annihilated_state(state)
    return _make_state(gamma, amp, norm, y)


def overlap(a: PhasedGaussianState, b: PhasedGaussianState) -> complex:
    """<a|b> including amplitudes and relative phase."""
    if a.n != b.n:
        raise InvalidArgument("overlap of states with different n")
    if a.annihilated or b.annihilated or a.parity != b.parity:
        return 0j
    na, nb = abs(a.amp), abs(b.amp)
    status, val = kernels.overlap_kernel(
        a.plus_space, b.plus_space, a.transition, b.transition,
        np.asarray(a.ref, dtype=np.int_), np.asarray(b.ref, dtype=np.int_),
        a.ref_amp / na, b.ref_amp / nb, OVERLAP_FLOOR)
    if status == 2:
        return _overlap_scrambled(a, b)
    return complex(na * nb * val)


class OverlapRows:
    """Kernel inputs for a fixed list of states, stacked once for repeated rows."""

    def __init__(self, states):
        self.states = list(states)
        self.size = len(self.states)
        self.groups = {}
        live = [(i, b) for i, b in enumerate(self.states) if not b.annihilated]
        for par in (1, -1):
            members = [(i, b) for i, b in live if b.parity == par]
            if not members:
                continue
            idx = np.array([i for i, _ in members])
            norms = np.array([abs(b.amp) for _, b in members])
            self.groups[par] = (
                idx, norms,
                np.array([b.plus_space for _, b in members]),
                np.array([b.transition for _, b in members]),
                np.array([b.ref for _, b in members], dtype=np.int_),
                np.array([b.ref_amp for _, b in members]) / norms)

    def row(self, a: PhasedGaussianState) -> np.ndarray:
        """``[<a|b> for b in states]``."""
        out = np.zeros(self.size, dtype=np.complex128)
        if a.annihilated or a.parity not in self.groups:
            return out
        idx, norms, Bs, Gs, refs, amps = self.groups[a.parity]
        if Bs.shape[1] != 2 * a.n:
            raise InvalidArgument("overlap of states with different n")
        na = abs(a.amp)
        status, vals = kernels.overlap_row_kernel(
            a.plus_space, a.transition, np.asarray(a.ref, dtype=np.int_), a.ref_amp / na,
            Bs, Gs, refs, amps, OVERLAP_FLOOR)
        vals = na * norms * vals
        vals[status == 1] = 0
        for r in np.nonzero(status == 2)[0]:
            vals[r] = _overlap_scrambled(a, self.states[idx[r]])
        out[idx] = vals
        return out


def overlap_row(a: PhasedGaussianState, states) -> np.ndarray:
    """``[<a|b> for b in states]`` with one kernel call per parity class."""
    if any(b.n != a.n for b in states):
        raise InvalidArgument("overlap of states with different n")
    return OverlapRows(states).row(a)


def _overlap_scrambled(a, b):
    rng = np.random.default_rng(0x5EED)
    n = a.n
    for _ in range(8):
        gens = [GaussianGenerator.rotation(*rng.choice(2 * n, 2, replace=False),
                                           rng.uniform(0, 2 * math.pi))
                for _ in range(4 * n)]
        a2, b2 = a, b
        for g in gens:
            a2 = evolve(a2, g)
            b2 = evolve(b2, g)
        ya = word_amplitude(a2, a2.ref)
        yb = word_amplitude(b2, a2.ref)
        if abs(ya) * abs(yb) >= 1e-10 * abs(a.amp) * abs(b.amp):
            return overlap(a2, b2)
    raise InvalidState("could not find a common reference for the overlap")


def random_gaussian_state(n, rng, depth=None, bits=None) -> PhasedGaussianState:
    """Random Gaussian state from a random generator circuit on |bits>."""
    depth = 10 * n if depth is None else depth
    st = prepare_basis_state(bits if bits is not None else [0] * n)
    for _ in range(depth):
        if n == 1:
            g = GaussianGenerator.rotation(0, 1, rng.uniform(0, 2 * math.pi))
        else:
            j, k = rng.choice(2 * n, 2, replace=False)
            g = GaussianGenerator.rotation(j, k, rng.uniform(0, 2 * math.pi))
        st = evolve(st, g)
    return st
