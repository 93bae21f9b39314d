"""Convex decompositions of noisy rotations into Gaussian-simulable branches.

A branch is either a unitary superposition (cost ``prob * l1^2``) or an
adaptive branch: a single-qubit measurement followed by a Gaussian unitary that
depends on the outcome (cost ``weight``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .decomp_unitary import (UnitaryDecomposition, circuit, compose, gaussian_decomposition,
                             pauli_gate, pauli_rotation_decomposition, rzz_decomposition,
                             adjacent, _mg)
from .errors import InvalidArgument
from .gaussian_core import GaussianCircuit
from .rng import keyed_rng

EXTENT_OPTIMAL = "extent-optimal"
AUGMENTED_FEASIBLE = "augmented-feasible"
FEASIBLE = "feasible"
_FLAG_ORDER = {EXTENT_OPTIMAL: 0, AUGMENTED_FEASIBLE: 1, FEASIBLE: 2}

#: branch probabilities below this are dropped
PROB_DROP = 1e-15


@dataclass(frozen=True)
class AdaptiveBranch:
    """Kraus operators ``circuit_m @ Pi_q(m)`` for ``((q, m), circuit_m)`` entries."""

    kraus: tuple
    weight: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "kraus", tuple((tuple(s), c) for s, c in self.kraus))


@dataclass(frozen=True)
class Branch:
    kind: str
    prob: float
    decomp: UnitaryDecomposition | None = None
    adaptive: AdaptiveBranch | None = None

    @property
    def cost(self) -> float:
        return self.decomp.extent if self.kind == "unitary" else 1.0

    @property
    def payload(self):
        return self.decomp if self.kind == "unitary" else self.adaptive


def unitary_branch(prob, decomp):
    return Branch("unitary", float(prob), decomp=decomp)


def adaptive_branch(weight, kraus):
    return Branch("adaptive", float(weight), adaptive=AdaptiveBranch(kraus, float(weight)))


@dataclass(frozen=True)
class ChannelDecomposition:
    """Probabilistic mixture of branches acting on ``n`` qubits."""

    n: int
    branches: tuple
    equimagical: bool = False
    optimal_flag: str = FEASIBLE
    label: str = ""
    cost: float = field(init=False)

    def __post_init__(self):
        branches = tuple(b for b in self.branches if b.prob > PROB_DROP)
        total = sum(b.prob for b in branches)
        if abs(total - 1.0) > 1e-12:
            raise InvalidArgument(f"branch probabilities sum to {total}, not 1")
        object.__setattr__(self, "branches", branches)
        object.__setattr__(self, "cost", float(sum(b.prob * b.cost for b in branches)))

    @property
    def probabilities(self):
        return [b.prob for b in self.branches]


def _check_p(p):
    p = float(p)
    if not (0.0 <= p <= 0.5):
        raise InvalidArgument(f"noise probability must lie in [0, 1/2], got {p}")
    return p


def _check_theta(theta):
    theta = float(theta)
    if not math.isfinite(theta):
        raise InvalidArgument("angle must be finite")
    return theta


_AXES = {"x": ("X",), "y": ("Y",), "z": ("Z",), "zz": ("ZZ",)}


def _axis(P, qubits):
    label = _AXES.get(str(P).lower(), (str(P).upper(),))[0]
    if any(ch not in "IXYZ" for ch in label):
        raise InvalidArgument(f"bad Pauli axis {P!r}")
    if qubits is None:
        qubits = tuple(range(len(label)))
    qubits = tuple(qubits)
    if len(qubits) != len(label):
        raise InvalidArgument(f"axis {label} needs {len(label)} target(s)")
    return label, qubits


def noisy_rotation_parameters(theta, p):
    """Angle ``phi`` and weight ``s`` of the equal-cost two-branch mixture."""
    theta, p = _check_theta(theta), _check_p(p)
    phi = math.asin(max(-1.0, min(1.0, (1 - 2 * p) * math.sin(theta))))
    cphi = math.cos(phi)
    if cphi < 1e-15:
        s = 0.5
    else:
        s = 0.5 * (1 + (1 - 2 * p) * math.cos(theta) / cphi)
    return phi, min(1.0, max(0.0, s))


def _pauli_flag(label, qubits):
    if label == "Y":
        return EXTENT_OPTIMAL
    if label == "ZZ" and adjacent(qubits):
        return EXTENT_OPTIMAL
    return FEASIBLE


def equimagical_noisy_rotation(P, theta, p, qubits=None, n=None) -> ChannelDecomposition:
    """``(1-p) R_P(theta) + p P R_P(theta)`` as ``s R_P(phi) + (1-s) R_P(pi - phi)``."""
    label, qubits = _axis(P, qubits)
    n = max(qubits) + 1 if n is None else n
    phi, s = noisy_rotation_parameters(theta, p)
    optimal = _pauli_flag(label, qubits) == EXTENT_OPTIMAL
    b1 = pauli_rotation_decomposition(label, phi, qubits, n, optimal, f"r{label.lower()}")
    b2 = pauli_rotation_decomposition(label, math.pi - phi, qubits, n, optimal,
                                      f"r{label.lower()}")
    return ChannelDecomposition(n, (unitary_branch(s, b1), unitary_branch(1 - s, b2)), True,
                                _pauli_flag(label, qubits), f"noisy_r{label.lower()}")


def naive_noisy_rotation(P, theta, p, noise=None, qubits=None, n=None) -> ChannelDecomposition:
    """``(1-p) R_P(theta) + p Q R_P(theta)`` with ``Q`` the noise Pauli (default ``P``).

    ``noise`` is a Pauli label on the same targets, e.g. ``"ZI"`` for noise on
    the first qubit of a ZZ rotation.
    """
    label, qubits = _axis(P, qubits)
    theta, p = _check_theta(theta), _check_p(p)
    n = max(qubits) + 1 if n is None else n
    noise = label if noise is None else noise.upper()
    R = pauli_rotation_decomposition(label, theta, qubits, n, False, f"r{label.lower()}")
    Q = gaussian_decomposition(circuit(n, [pauli_gate(noise, qubits)]), "pauli")
    QR = compose(R, Q)
    return ChannelDecomposition(n, (unitary_branch(1 - p, R), unitary_branch(p, QR)), True,
                                FEASIBLE, f"naive_r{label.lower()}")


def adaptive_nzz_single_z(theta, p, noisy_qubit="first", qubits=(0, 1), n=None) -> ChannelDecomposition:
    """ZZ rotation followed by Z noise on one qubit, with a measure-and-rotate branch."""
    theta, p = _check_theta(theta), _check_p(p)
    if noisy_qubit not in ("first", "second"):
        raise InvalidArgument("noisy_qubit must be 'first' or 'second'")
    q0, q1 = qubits
    n = max(qubits) + 1 if n is None else n
    R = rzz_decomposition(theta, (q0, q1), n)
    meas, rot = (q0, q1) if noisy_qubit == "first" else (q1, q0)
    kraus = (((meas, 0), circuit(n, [_mg("rz", (rot,), theta)])),
             ((meas, 1), circuit(n, [_mg("rz", (rot,), -theta)])))
    return ChannelDecomposition(n, (unitary_branch(1 - 2 * p, R), adaptive_branch(2 * p, kraus)),
                                False, AUGMENTED_FEASIBLE, f"adaptive_nzz_{noisy_qubit}")


def mixture(parts, weights, label="mixture") -> ChannelDecomposition:
    """Convex combination of channel decompositions on the same qubits."""
    if len(parts) != len(weights):
        raise InvalidArgument("parts and weights differ in length")
    n = parts[0].n
    branches = []
    for w, ch in zip(weights, parts):
        if ch.n != n:
            raise InvalidArgument("channel sizes differ")
        for b in ch.branches:
            if b.kind == "unitary":
                branches.append(unitary_branch(w * b.prob, b.decomp))
            else:
                branches.append(adaptive_branch(w * b.prob, b.adaptive.kraus))
    norms = {round(b.decomp.l1_norm, 12) for b in branches if b.kind == "unitary"}
    equi = all(ch.equimagical for ch in parts) and len(norms) <= 1
    flag = max((ch.optimal_flag for ch in parts), key=_FLAG_ORDER.get)
    if flag == EXTENT_OPTIMAL:
        flag = FEASIBLE
    return ChannelDecomposition(n, tuple(branches), equi, flag, label)


def general_dephasing_decomposition(theta, p, allow_adaptive=False, qubits=(0, 1),
                                    n=None) -> ChannelDecomposition:
    """ZZ rotation followed by ``(1-p) I + p/3 (Z1 + Z2 + Z1 Z2)``, as a third of each part."""
    theta, p = _check_theta(theta), _check_p(p)
    q0, q1 = qubits
    n = max(qubits) + 1 if n is None else n
    zz = equimagical_noisy_rotation("ZZ", theta, p, (q0, q1), n)
    if allow_adaptive:
        z1 = adaptive_nzz_single_z(theta, p, "first", (q0, q1), n)
        z2 = adaptive_nzz_single_z(theta, p, "second", (q0, q1), n)
    else:
        z1 = naive_noisy_rotation("ZZ", theta, p, "ZI", (q0, q1), n)
        z2 = naive_noisy_rotation("ZZ", theta, p, "IZ", (q0, q1), n)
    return mixture([z1, z2, zz], [1 / 3, 1 / 3, 1 / 3],
                   "general_dephasing_adaptive" if allow_adaptive else "general_dephasing")


def reference_kraus(kind, theta, p, noise="zz"):
    """Defining weighted Kraus list of a noisy ZZ rotation on qubits (0, 1).

    ``kind`` is ``"rzz"``; ``noise`` is ``zz``, ``z1``, ``z2`` or ``general``.
    For single-qubit rotations pass ``kind`` in ``x``, ``y``, ``z``.
    """
    from . import oracle as O
    theta, p = _check_theta(theta), _check_p(p)
    if kind in ("x", "y", "z"):
        P = O.PAULI[kind.upper()]
        R = O.rot(P, theta)
        return [(1 - p, R), (p, P @ R)]
    if kind != "rzz":
        raise InvalidArgument(f"unknown channel kind {kind!r}")
    R = O.rot(O.pauli_matrix("ZZ"), theta)
    paulis = {"zz": ["ZZ"], "z1": ["ZI"], "z2": ["IZ"], "general": ["ZI", "IZ", "ZZ"]}
    if noise not in paulis:
        raise InvalidArgument(f"unknown noise {noise!r}")
    labels = paulis[noise]
    out = [(1 - p, R)]
    for lab in labels:
        out.append((p / len(labels), O.pauli_matrix(lab) @ R))
    return out


# --------------------------------------------------------------------------
# fermionic nonlinearity
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class FNLDecomposition:
    """``U rho U^dag = sum q_jk L_j rho R_k^dag`` with Gaussian L, R."""

    terms: tuple
    l1: float


def fnl_decomposition(U_decomp: UnitaryDecomposition) -> FNLDecomposition:
    """Dyadic quasiprobability terms ``c_j conj(c_k)`` from a unitary decomposition."""
    if not U_decomp.terms:
        raise InvalidArgument("decomposition has no terms")
    terms = tuple((cj * np.conj(ck), Kj, Kk)
                  for cj, Kj in U_decomp.terms for ck, Kk in U_decomp.terms)
    return FNLDecomposition(terms, float(sum(abs(q) for q, _, _ in terms)))


def fnl_prior_bound(theta):
    """Earlier bound for the ZZ rotation by ``theta``."""
    return 1 + 2 * abs(math.sin(theta))


# --------------------------------------------------------------------------
# decomposition oracle
# --------------------------------------------------------------------------

@dataclass
class DecompositionOracle:
    """Channel descriptor -> decomposition table with keyed, reproducible draws."""

    seed: int = 0
    table: dict = field(default_factory=dict)

    def register(self, descriptor, decomposition):
        if isinstance(decomposition, UnitaryDecomposition):
            decomposition = ChannelDecomposition(decomposition.n,
                                                 (unitary_branch(1.0, decomposition),),
                                                 True, EXTENT_OPTIMAL if decomposition.optimal
                                                 else FEASIBLE, decomposition.label)
        elif isinstance(decomposition, GaussianCircuit):
            decomposition = ChannelDecomposition(decomposition.n,
                                                 (unitary_branch(1.0, gaussian_decomposition(decomposition)),),
                                                 True, EXTENT_OPTIMAL, "gaussian")
        self.table[descriptor] = decomposition
        return descriptor

    def lookup(self, descriptor) -> ChannelDecomposition:
        try:
            return self.table[descriptor]
        except (KeyError, TypeError):
            raise InvalidArgument(f"channel {descriptor!r} is not registered") from None


def branch_index(ch: ChannelDecomposition, u: float) -> int:
    """Index of the branch selected by the uniform ``u`` (inverse CDF)."""
    acc = 0.0
    for i, b in enumerate(ch.branches):
        acc += b.prob
        if u < acc:
            return i
    return len(ch.branches) - 1


def oracle_sample(oracle: DecompositionOracle, descriptor, draw_index: int):
    """Branch payload drawn with its probability, keyed by (seed, descriptor, draw)."""
    ch = oracle.lookup(descriptor)
    if len(ch.branches) == 1:
        return ch.branches[0].payload
    u = keyed_rng(oracle.seed, "oracle", descriptor, draw_index).random()
    return ch.branches[branch_index(ch, u)].payload


def sample_branch(ch: ChannelDecomposition, rng) -> Branch:
    """Draw a branch of ``ch`` with generator ``rng``."""
    if len(ch.branches) == 1:
        return ch.branches[0]
    idx = rng.choice(len(ch.branches), p=np.asarray(ch.probabilities) / sum(ch.probabilities))
    return ch.branches[int(idx)]


def oracle_cost(oracle: DecompositionOracle, descriptor) -> float:
    """Probability-weighted squared L1 norm, adaptive branches counting 1."""
    return oracle.lookup(descriptor).cost
