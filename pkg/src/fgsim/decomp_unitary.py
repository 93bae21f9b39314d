"""Superpositions of Gaussian unitaries for non-Gaussian gates and states.

Every term circuit is built from named matchgates, so each term is Gaussian by
construction.  Coefficients carry all global phases.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgument
from .gaussian_core import (GaussianCircuit, GaussianGenerator, PhasedGaussianState,
                            apply_circuit, prepare_basis_state)

#: coefficients with modulus below this are dropped from emitted decompositions
COEFF_DROP = 1e-15


@dataclass(frozen=True)
class UnitaryDecomposition:
    """``U = sum_j coeff_j * circuit_j`` with Gaussian circuits on ``n`` qubits."""

    n: int
    terms: tuple
    extent_claim: float | None = None
    optimal: bool = False
    label: str = ""
    l1_norm: float = field(init=False)

    def __post_init__(self):
        terms = tuple((complex(c), circ) for c, circ in self.terms)
        for _, circ in terms:
            if circ.n != self.n:
                raise InvalidArgument("term circuit size differs from decomposition size")
        object.__setattr__(self, "terms", terms)
        object.__setattr__(self, "l1_norm", float(sum(abs(c) for c, _ in terms)))

    @property
    def extent(self) -> float:
        """Squared L1 norm of the coefficients."""
        return self.l1_norm ** 2

    @property
    def rank(self) -> int:
        return len(self.terms)


@dataclass(frozen=True)
class StateDecomposition:
    """``|psi> = sum_j coeff_j |phi_j>`` with Gaussian ``phi_j``.

    ``circuits[j]`` prepares ``phi_j`` from the state ``base`` when known.
    """

    n: int
    terms: tuple
    extent_claim: float | None = None
    circuits: tuple = ()
    base: PhasedGaussianState | None = None
    label: str = ""
    l1_norm: float = field(init=False)

    def __post_init__(self):
        terms = tuple((complex(c), s) for c, s in self.terms)
        object.__setattr__(self, "terms", terms)
        object.__setattr__(self, "l1_norm", float(sum(abs(c) for c, _ in terms)))

    @property
    def extent(self) -> float:
        return self.l1_norm ** 2


@dataclass(frozen=True)
class TwoQubitFermionicParams:
    """Angles of ``(RZ t1 x RZ t2) RXX(a) RYY(b) RZZ(c) (RZ t3 x RZ t4)``."""

    t1: float
    t2: float
    t3: float
    t4: float
    a: float
    b: float
    c: float


# --------------------------------------------------------------------------
# circuit helpers
# --------------------------------------------------------------------------

def _mg(name, qubits, *params):
    return GaussianGenerator.matchgate(name, qubits, *params)


def pauli_gate(label, qubits):
    return _mg("pauli", tuple(qubits), label)


def circuit(n, gates=(), phase=1.0):
    return GaussianCircuit(n, tuple(gates), complex(phase))


def _check_targets(qubits, n, arity):
    qubits = tuple(int(q) for q in qubits)
    if len(qubits) != arity:
        raise InvalidArgument(f"expected {arity} target qubit(s), got {len(qubits)}")
    if len(set(qubits)) != arity:
        raise InvalidArgument("repeated target qubit")
    if any(q < 0 or q >= n for q in qubits):
        raise InvalidArgument(f"target out of range for n={n}")
    return qubits


def adjacent(qubits) -> bool:
    return len(qubits) == 2 and abs(qubits[0] - qubits[1]) == 1


def _drop_zero(terms):
    return [(c, k) for c, k in terms if abs(c) > COEFF_DROP]


def pauli_rotation_decomposition(label, theta, qubits, n, optimal=True, label_name=""):
    """``R_P(theta) = cos(theta/2) I - i sin(theta/2) P`` for a Pauli string P."""
    qubits = tuple(qubits)
    terms = _drop_zero([
        (math.cos(theta / 2), circuit(n)),
        (-1j * math.sin(theta / 2), circuit(n, [pauli_gate(label, qubits)])),
    ])
    return UnitaryDecomposition(n, terms, 1 + abs(math.sin(theta)), optimal,
                                label_name or f"r{label.lower()}")


def rzz_decomposition(theta, qubits=(0, 1), n=None):
    n = _ambient(qubits, n)
    qubits = _check_targets(qubits, n, 2)
    return pauli_rotation_decomposition("ZZ", theta, qubits, n, True, "rzz")


def cphase_decomposition(theta, qubits=(0, 1), n=None):
    n = _ambient(qubits, n)
    q0, q1 = _check_targets(qubits, n, 2)
    pre = [_mg("rz", (q0,), theta / 2), _mg("rz", (q1,), theta / 2)]
    g = cmath.exp(1j * theta / 4)
    terms = _drop_zero([
        (g * math.cos(theta / 4), circuit(n, pre)),
        (1j * g * math.sin(theta / 4), circuit(n, pre + [pauli_gate("ZZ", (q0, q1))])),
    ])
    return UnitaryDecomposition(n, terms, 1 + abs(math.sin(theta / 2)), True, "cphase")


def swap_decomposition(qubits=(0, 1), n=None):
    """Two fSWAP-based terms on adjacent qubits, four Pauli terms otherwise."""
    n = _ambient(qubits, n)
    q0, q1 = _check_targets(qubits, n, 2)
    if adjacent((q0, q1)):
        lo, hi = min(q0, q1), max(q0, q1)
        pre = [_mg("rz", (lo,), math.pi / 2), _mg("rz", (hi,), math.pi / 2)]
        g = cmath.exp(1j * math.pi / 4) / math.sqrt(2)
        terms = [
            (g, circuit(n, pre + [_mg("fswap", (lo, hi))])),
            (1j * g, circuit(n, pre + [pauli_gate("ZZ", (lo, hi)), _mg("fswap", (lo, hi))])),
        ]
        return UnitaryDecomposition(n, terms, 2.0, True, "swap_nn")
    terms = [(0.5, circuit(n))] + [(0.5, circuit(n, [pauli_gate(p, (q0, q1))]))
                                   for p in ("XX", "YY", "ZZ")]
    return UnitaryDecomposition(n, terms, 4.0, False, "swap")


def hadamard_decomposition(qubit=0, n=None):
    n = _ambient((qubit,), n)
    (q,) = _check_targets((qubit,), n, 1)
    r = 1 / math.sqrt(2)
    terms = [(r, circuit(n, [pauli_gate("Z", (q,))])), (r, circuit(n, [pauli_gate("X", (q,))]))]
    return UnitaryDecomposition(n, terms, 2.0, True, "hadamard")


def _ambient(qubits, n):
    if n is None:
        return max(qubits) + 1
    return int(n)


OPTIMAL_GATES = ("rzz", "cphase", "swap_nn", "hadamard", "ry", "rx")


def optimal_unitary_decomposition(gate_id, theta=None, qubits=None, n=None) -> UnitaryDecomposition:
    """Catalog decomposition of ``gate_id`` with its extent."""
    if gate_id not in OPTIMAL_GATES:
        raise InvalidArgument(f"unknown gate id {gate_id!r}; expected one of {OPTIMAL_GATES}")
    needs_theta = gate_id in ("rzz", "cphase", "ry", "rx")
    if needs_theta:
        if theta is None:
            raise InvalidArgument(f"{gate_id} needs an angle")
        theta = float(theta)
        if not math.isfinite(theta):
            raise InvalidArgument("angle must be finite")
    two = gate_id in ("rzz", "cphase", "swap_nn")
    if qubits is None:
        qubits = (0, 1) if two else (0,)
    qubits = tuple(qubits)
    if gate_id == "rzz":
        return rzz_decomposition(theta, qubits, n)
    if gate_id == "cphase":
        return cphase_decomposition(theta, qubits, n)
    if gate_id == "swap_nn":
        return swap_decomposition(qubits, n)
    if gate_id == "hadamard":
        return hadamard_decomposition(*qubits, n=n)
    n = _ambient(qubits, n)
    (q,) = _check_targets(qubits, n, 1)
    return pauli_rotation_decomposition("Y" if gate_id == "ry" else "X", theta, (q,), n,
                                        True, gate_id)


# --------------------------------------------------------------------------
# algebra on decompositions
# --------------------------------------------------------------------------

def compose(first: UnitaryDecomposition, second: UnitaryDecomposition) -> UnitaryDecomposition:
    """Decomposition of ``second @ first`` (``first`` acts first), termwise."""
    if first.n != second.n:
        raise InvalidArgument("decomposition sizes differ")
    terms = [(c1 * c2, k1.then(k2)) for c1, k1 in first.terms for c2, k2 in second.terms]
    claim = None
    if first.extent_claim is not None and second.extent_claim is not None:
        claim = first.extent_claim * second.extent_claim
    return UnitaryDecomposition(first.n, terms, claim, False,
                                f"{first.label}*{second.label}")


def tensor(first: UnitaryDecomposition, second: UnitaryDecomposition) -> UnitaryDecomposition:
    """Termwise product of decompositions acting on disjoint qubits."""
    out = compose(first, second)
    return UnitaryDecomposition(out.n, out.terms, out.extent_claim,
                                first.optimal and second.optimal, out.label)


def gaussian_decomposition(circ: GaussianCircuit, label="gaussian") -> UnitaryDecomposition:
    """A Gaussian unitary as a one-term decomposition."""
    return UnitaryDecomposition(circ.n, [(1.0, circ)], 1.0, True, label)


def with_gaussian(decomp: UnitaryDecomposition, before: GaussianCircuit | None = None,
                  after: GaussianCircuit | None = None) -> UnitaryDecomposition:
    """Sandwich every term between Gaussian circuits."""
    terms = []
    for c, k in decomp.terms:
        if before is not None:
            k = before.then(k)
        if after is not None:
            k = k.then(after)
        terms.append((c, k))
    return UnitaryDecomposition(decomp.n, terms, decomp.extent_claim, decomp.optimal,
                                decomp.label)


def remap_circuit(circ: GaussianCircuit, mapping, n: int) -> GaussianCircuit:
    """Move a circuit onto other qubits: old qubit q goes to ``mapping[q]``.

    Rotations are shifted through their Majorana indices, which keeps them
    exact as long as the image of every pair of modes keeps its order and
    adjacency; single Majoranas are rewritten as Pauli strings first.
    """
    gates = []
    for g in circ.gates:
        if g.kind == "matchgate":
            gates.append(GaussianGenerator("matchgate", name=g.name,
                                           qubits=tuple(mapping[q] for q in g.qubits),
                                           params=g.params))
        elif g.kind == "majorana":
            q = g.j // 2
            label = "Z" * q + ("X" if g.j % 2 == 0 else "Y")
            gates.append(pauli_gate(label, tuple(mapping[r] for r in range(q + 1))))
        else:
            qj, qk = g.j // 2, g.k // 2
            lo, hi = min(qj, qk), max(qj, qk)
            if any(mapping[r + 1] != mapping[r] + 1 for r in range(lo, hi)):
                raise InvalidArgument("rotation cannot be remapped onto non-contiguous qubits")
            gates.append(GaussianGenerator.rotation(2 * mapping[qj] + g.j % 2,
                                                    2 * mapping[qk] + g.k % 2, g.theta))
    return GaussianCircuit(n, tuple(gates), circ.phase)


def embed_decomposition(decomp: UnitaryDecomposition, mapping, n: int) -> UnitaryDecomposition:
    terms = [(c, remap_circuit(k, mapping, n)) for c, k in decomp.terms]
    return UnitaryDecomposition(n, terms, decomp.extent_claim, decomp.optimal, decomp.label)


# --------------------------------------------------------------------------
# parity-preserving two-qubit gates
# --------------------------------------------------------------------------

_EVEN = [0, 3]
_ODD = [1, 2]


def _rz2(alpha):
    return np.diag([cmath.exp(-0.5j * alpha), cmath.exp(0.5j * alpha)])


def _rx2(gamma):
    c, s = math.cos(gamma / 2), math.sin(gamma / 2)
    return np.array([[c, -1j * s], [-1j * s, c]])


def _euler_zxz(V):
    """Angles with V = +-Rz(alpha) Rx(gamma) Rz(beta) for V in SU(2)."""
    p, q = V[0, 0], V[0, 1]
    gamma = 2 * math.atan2(abs(q), abs(p))
    if abs(p) > 1e-12:
        s = -2 * cmath.phase(p)
    else:
        s = 0.0
    if abs(q) > 1e-12:
        d = -2 * cmath.phase(1j * q)
    else:
        d = 0.0
    return 0.5 * (s + d), gamma, 0.5 * (s - d)


def _wrap(x):
    """Representative of x modulo 4 pi in (-2 pi, 2 pi]."""
    y = math.fmod(x, 4 * math.pi)
    if y <= -2 * math.pi:
        y += 4 * math.pi
    elif y > 2 * math.pi:
        y -= 4 * math.pi
    return y


def kak_matrix(params: TwoQubitFermionicParams) -> np.ndarray:
    """Dense product of the seven-angle form."""
    from . import oracle as O
    p = params
    A = np.kron(O.rot(O.Z, p.t1), O.rot(O.Z, p.t2))
    B = np.kron(O.rot(O.Z, p.t3), O.rot(O.Z, p.t4))
    return (A @ O.rot(O.pauli_matrix("XX"), p.a) @ O.rot(O.pauli_matrix("YY"), p.b)
            @ O.rot(O.pauli_matrix("ZZ"), p.c) @ B)


def check_fermionic(U, tol=1e-10):
    U = np.asarray(U, dtype=np.complex128)
    if U.shape != (4, 4):
        raise InvalidArgument("expected a 4x4 matrix")
    if np.max(np.abs(U.conj().T @ U - np.eye(4))) > tol:
        raise InvalidArgument("matrix is not unitary")
    if max(abs(U[i, j]) for i in _EVEN for j in _ODD) > tol or \
            max(abs(U[i, j]) for i in _ODD for j in _EVEN) > tol:
        raise InvalidArgument("matrix does not preserve parity")
    return U


def kak_fermionic(U, parity_check: float = 1e-10):
    """Seven angles and a phase ``g`` with ``U = g * kak_matrix(params)``.

    ``c`` is taken in (-pi/2, pi/2]; the Euler angles use principal branches.
    """
    U = check_fermionic(U, parity_check)
    Ue = U[np.ix_(_EVEN, _EVEN)]
    Uo = U[np.ix_(_ODD, _ODD)]
    de, do = np.linalg.det(Ue), np.linalg.det(Uo)
    c = 0.5 * cmath.phase(do / de)
    # det Ue = g^2 e^{-ic}
    g = cmath.sqrt(de * cmath.exp(1j * c))
    Ve = Ue / (g * cmath.exp(-0.5j * c))
    Vo = Uo / (g * cmath.exp(0.5j * c))
    a1, ge, a3 = _euler_zxz(Ve)
    b1, go, b3 = _euler_zxz(Vo)
    # even block: Rz(t1+t2) Rx(a-b) Rz(t3+t4); odd block: Rz(t1-t2) Rx(a+b) Rz(t3-t4)
    params = TwoQubitFermionicParams(0.5 * (a1 + b1), 0.5 * (a1 - b1), 0.5 * (a3 + b3),
                                     0.5 * (a3 - b3), 0.5 * (ge + go), 0.5 * (go - ge), c)
    R = kak_matrix(params)
    k = int(np.argmax(np.abs(U)))
    g = U.flat[k] / R.flat[k]
    if np.max(np.abs(g * R - U)) > 1e-8:
        # the two blocks disagree by a sign; t1, t2 -> t1 + pi, t2 + pi flips the even block
        params = TwoQubitFermionicParams(params.t1 + math.pi, params.t2 + math.pi, params.t3,
                                         params.t4, params.a, params.b, params.c)
    params = TwoQubitFermionicParams(*(_wrap(v) for v in (params.t1, params.t2, params.t3,
                                                          params.t4, params.a, params.b)),
                                     params.c)
    R = kak_matrix(params)
    g = U.flat[k] / R.flat[k]
    g /= abs(g)
    return params, complex(g)


def _is_diagonal(U, tol=1e-10):
    return np.max(np.abs(U - np.diag(np.diag(U)))) <= tol


def decompose_two_qubit_fermionic(U, adjacency="nearest", n=None, targets=(0, 1),
                                  parity_check: float = 1e-10) -> UnitaryDecomposition:
    """Gaussian superposition of a parity-preserving two-qubit gate.

    Nearest-neighbour or diagonal gates get two terms with extent
    ``1 + |sin c|``; other gates get the product expansion of the three
    two-qubit rotations.
    """
    if adjacency not in ("nearest", "nonadjacent"):
        raise InvalidArgument("adjacency must be 'nearest' or 'nonadjacent'")
    U = check_fermionic(U, parity_check)
    n = _ambient(targets, n)
    q0, q1 = _check_targets(targets, n, 2)
    if (adjacency == "nearest") != adjacent((q0, q1)):
        raise InvalidArgument(f"targets {(q0, q1)} are not {adjacency}")
    params, g = kak_fermionic(U, parity_check)
    p = params
    diag = _is_diagonal(U, parity_check)
    pre = circuit(n, [_mg("rz", (q0,), p.t3), _mg("rz", (q1,), p.t4)])
    post = circuit(n, [_mg("rz", (q0,), p.t1), _mg("rz", (q1,), p.t2)])
    zz = rzz_decomposition(p.c, (q0, q1), n)
    if diag:
        # the XX and YY angles vanish for diagonal gates
        return _finish(zz, pre, post, g, n, "u4", 1 + abs(math.sin(p.c)), True)
    if adjacent((q0, q1)):
        lo, hi = min(q0, q1), max(q0, q1)
        mid = circuit(n, [_mg("ryy", (lo, hi), p.b), _mg("rxx", (lo, hi), p.a)])
        body = with_gaussian(zz, after=mid)
        return _finish(body, pre, post, g, n, "u4", 1 + abs(math.sin(p.c)), True)
    xx = pauli_rotation_decomposition("XX", p.a, (q0, q1), n)
    yy = pauli_rotation_decomposition("YY", p.b, (q0, q1), n)
    body = compose(compose(zz, yy), xx)
    claim = (1 + abs(math.sin(p.a))) * (1 + abs(math.sin(p.b))) * (1 + abs(math.sin(p.c)))
    return _finish(body, pre, post, g, n, "u4", claim, False)


def _finish(body, pre, post, g, n, label, claim, optimal):
    body = with_gaussian(body, before=pre, after=post)
    terms = [(g * c, k) for c, k in body.terms]
    return UnitaryDecomposition(n, terms, claim, optimal, label)


# --------------------------------------------------------------------------
# states
# --------------------------------------------------------------------------

def bell_pairs_circuit(n_pairs: int) -> GaussianCircuit:
    """Prepares ``((|00> + |11>)/sqrt 2)^{n_pairs}`` from the all-zero state."""
    n = 2 * n_pairs
    gates = [_mg("rxy", (2 * i, 2 * i + 1), math.pi / 2) for i in range(n_pairs)]
    return circuit(n, gates)


def magic_state_decomposition(theta: float) -> StateDecomposition:
    """Two orthogonal Gaussian terms for ``(I x C(theta) x I)|psi+>|psi+>``."""
    theta = float(theta)
    prep = bell_pairs_circuit(2)
    base = apply_circuit(prepare_basis_state([0] * 4), prep)
    gate = cphase_decomposition(theta, (1, 2), 4)
    terms = [(c, apply_circuit(base, k)) for c, k in gate.terms]
    return StateDecomposition(4, terms, 1 + abs(math.sin(theta / 2)),
                              tuple(k for _, k in gate.terms), base, "magic")


def _parse_pattern(pattern):
    out = []
    for item in pattern:
        if isinstance(item, str):
            key = item.lower()
            if key in ("zero", "0"):
                out.append(("zero", 0.0))
            elif key in ("one", "1"):
                out.append(("one", 0.0))
            elif key in ("plus", "+"):
                out.append(("plus", 0.0))
            else:
                raise InvalidArgument(f"bad pattern entry {item!r}")
        else:
            kind, delta = item
            if kind != "plus":
                raise InvalidArgument(f"bad pattern entry {item!r}")
            out.append(("plus", float(delta)))
    return out


def plus_state_decomposition(pattern) -> StateDecomposition:
    """Gaussian terms for a product of |0>, |1> and (|0> + e^{i d}|1>)/sqrt 2.

    Entries are ``"zero"``, ``"one"``, ``"plus"`` or ``("plus", d)``.
    """
    items = _parse_pattern(pattern)
    if not items:
        raise InvalidArgument("empty pattern")
    n = len(items)
    zero = prepare_basis_state([0] * n)
    plus_pos = [i for i, (k, _) in enumerate(items) if k == "plus"]
    ones = [i for i, (k, _) in enumerate(items) if k == "one"]
    flips = [pauli_gate("X", (q,)) for q in ones]
    if not plus_pos:
        circ = circuit(n, flips)
        return StateDecomposition(n, [(1.0, apply_circuit(zero, circ))], 1.0, (circ,), zero,
                                  "product")
    t = len(plus_pos)
    ladder = [_mg("rxy", (j, j + 1), math.pi / 2) for j in range(t - 1)]
    phases = []
    total = 0.0
    for j, pos in enumerate(plus_pos):
        d = items[pos][1]
        if d != 0.0:
            phases.append(_mg("rz", (j,), d))
            total += d
    route = []
    for j in reversed(range(t)):
        for r in range(j, plus_pos[j]):
            route.append(_mg("fswap", (r, r + 1)))
    even = circuit(n, ladder + phases + route + flips)
    odd = circuit(n, [pauli_gate("X", (0,))] + ladder + phases + route + flips)
    coeff = cmath.exp(0.5j * total) / math.sqrt(2)
    terms = [(coeff, apply_circuit(zero, even)), (coeff, apply_circuit(zero, odd))]
    return StateDecomposition(n, terms, 2.0, (even, odd), zero, "plus")


def product_state_decomposition(parts) -> StateDecomposition:
    """Tensor product of state decompositions, termwise (qubits concatenated)."""
    from .gaussian_core import prepare_basis_state as _pb
    n = sum(p.n for p in parts)
    circs = [(1.0 + 0j, circuit(n))]
    offset = 0
    for p in parts:
        if not p.circuits or p.base is None or not _is_zero_state(p.base):
            raise InvalidArgument("factor must come with circuits from the all-zero state")
        mapping = {q: q + offset for q in range(p.n)}
        new = []
        for c0, k0 in circs:
            for (c, _), k in zip(p.terms, p.circuits):
                new.append((c0 * c, k0.then(remap_circuit(k, mapping, n))))
        circs = new
        offset += p.n
    zero = _pb([0] * n)
    terms = [(c, apply_circuit(zero, k)) for c, k in circs]
    claim = 1.0
    for p in parts:
        claim *= p.extent_claim if p.extent_claim is not None else p.extent
    return StateDecomposition(n, terms, claim, tuple(k for _, k in circs), zero, "product")


def _is_zero_state(s):
    return s.ref == (0,) * s.n and abs(s.amp - 1) < 1e-12 and \
        np.allclose(np.asarray(s.cov), np.asarray(prepare_basis_state([0] * s.n).cov))


# --------------------------------------------------------------------------
# gadget
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class LiftReport:
    """Outcome of the dense gadget check for a two-qubit gate."""

    choi_vector: np.ndarray
    gadget_matrix: np.ndarray
    error: float
    lifted: UnitaryDecomposition | None = None
    lifted_error: float | None = None


def gadget_operator() -> np.ndarray:
    """4 (<psi+| x I x I x <psi+|) mapping six qubits to the middle two."""
    from . import oracle as O
    bra = O.PSI_PLUS.conj()[None, :]
    return 4.0 * O.kron(bra, np.eye(4), bra)


def lift_gadget(V=None, decomposition: UnitaryDecomposition | None = None,
                state_decomposition: StateDecomposition | None = None,
                tol: float = 1e-10) -> LiftReport:
    """Check the gadget identity for ``V`` and lift a state decomposition to ``V``.

    Supply ``V`` as a dense 4x4 matrix, or ``decomposition`` on two qubits (its
    dense sum is used as ``V``).  If a Gaussian decomposition of the Choi
    vector is available (``state_decomposition`` with circuits on qubits 1 and
    2, or derived from ``decomposition``), the lifted decomposition of ``V``
    reuses its coefficients.
    """
    from . import oracle as O
    if decomposition is not None:
        if decomposition.n != 2:
            raise InvalidArgument("gadget lifting needs a two-qubit decomposition")
        Vd = O.decomposition_matrix(decomposition)
        V = Vd if V is None else np.asarray(V, dtype=np.complex128)
        if state_decomposition is None:
            base = apply_circuit(prepare_basis_state([0] * 4), bell_pairs_circuit(2))
            circs = tuple(remap_circuit(k, {0: 1, 1: 2}, 4) for _, k in decomposition.terms)
            state_decomposition = StateDecomposition(
                4, [(c, apply_circuit(base, k)) for (c, _), k in zip(decomposition.terms, circs)],
                decomposition.extent_claim, circs, base, "choi")
    if V is None:
        raise InvalidArgument("need a gate matrix or a decomposition")
    V = np.asarray(V, dtype=np.complex128)
    if V.shape != (4, 4):
        raise InvalidArgument("expected a 4x4 gate")
    if max(abs(V[i, j]) for i in _EVEN for j in _ODD) > tol or \
            max(abs(V[i, j]) for i in _ODD for j in _EVEN) > tol:
        raise InvalidArgument("gate does not preserve parity")
    g2 = np.kron(O.PSI_PLUS, O.PSI_PLUS)
    v = O.apply_local(g2, V, [1, 2], 4)
    # I x |v> x I : 2 qubits -> 6 qubits (in1, v1..v4, in2)
    emb = np.zeros((64, 4), dtype=np.complex128)
    for col in range(4):
        a, b = col >> 1, col & 1
        emb[:, col] = np.kron(np.kron(np.eye(2)[a], v), np.eye(2)[b])
    M = gadget_operator() @ emb
    err = float(np.max(np.abs(M - V)))
    lifted = lifted_err = None
    if state_decomposition is not None:
        if not state_decomposition.circuits:
            raise InvalidArgument("state decomposition has no circuits to lift")
        terms = [(c, remap_circuit(k, {1: 0, 2: 1, 0: None, 3: None}, 2))
                 for (c, _), k in zip(state_decomposition.terms, state_decomposition.circuits)]
        lifted = UnitaryDecomposition(2, terms, state_decomposition.extent_claim,
                                      decomposition.optimal if decomposition else False, "lifted")
        lifted_err = float(np.max(np.abs(O.decomposition_matrix(lifted) - V)))
    return LiftReport(v, M, err, lifted, lifted_err)
