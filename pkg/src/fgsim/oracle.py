"""Dense state-vector backend used as ground truth.

Basis ordering is big-endian: qubit 0 is the most significant bit of the
state-vector index, so ``|01>`` sits at index 1.  All matrices are plain
``numpy`` arrays.

Choi states use the sandwich layout: a two-qubit channel acts on qubits 1 and 2
of ``|psi+>|psi+>`` (pairs (0,1) and (2,3)); a one-qubit channel acts on
qubit 1 of ``|psi+>``.  :func:`choi_to_textbook` moves the channel output to the
last qubits.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from .errors import InvalidArgument, ResourceLimit

#: soft size limit for dense objects
MAX_QUBITS = 14

I2 = np.eye(2, dtype=np.complex128)
X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)
H = np.array([[1, 1], [1, -1]], dtype=np.complex128) / math.sqrt(2)
PAULI = {"I": I2, "X": X, "Y": Y, "Z": Z}


def _check_n(n, limit=MAX_QUBITS):
    if n > limit:
        raise ResourceLimit(f"dense oracle limited to {limit} qubits, got {n}",
                            requested=n, limit=limit)


def kron(*ops):
    out = np.eye(1, dtype=np.complex128)
    for op in ops:
        out = np.kron(out, op)
    return out


def pauli_matrix(label: str) -> np.ndarray:
    return kron(*(PAULI[ch] for ch in label.upper()))


def basis_vector(bits) -> np.ndarray:
    n = len(bits)
    v = np.zeros(2 ** n, dtype=np.complex128)
    v[int("".join(str(int(b)) for b in bits), 2) if n else 0] = 1.0
    return v


def rot(P: np.ndarray, theta: float) -> np.ndarray:
    """exp(-i theta/2 P) for an involutory P."""
    return math.cos(theta / 2) * np.eye(P.shape[0]) - 1j * math.sin(theta / 2) * P


# --------------------------------------------------------------------------
# Majorana operators on vectors
# --------------------------------------------------------------------------

@lru_cache(maxsize=None)
def _majorana_tables(n, j):
    q = j // 2
    idx = np.arange(2 ** n)
    bit = (idx >> (n - 1 - q)) & 1
    below = np.zeros(2 ** n, dtype=np.int64)
    for r in range(q):
        below += (idx >> (n - 1 - r)) & 1
    sign = np.where(below % 2, -1.0, 1.0).astype(np.complex128)
    if j % 2:
        sign = sign * np.where(bit, -1j, 1j)
    target = idx ^ (1 << (n - 1 - q))
    sign.setflags(write=False)
    target.setflags(write=False)
    return target, sign


def apply_majorana(vec: np.ndarray, j: int, n: int) -> np.ndarray:
    """c_j |vec> with c_2q = Z..Z X_q and c_2q+1 = Z..Z Y_q."""
    target, sign = _majorana_tables(n, j)
    out = np.empty_like(vec)
    out[target] = sign * vec
    return out


def majorana_matrix(j: int, n: int) -> np.ndarray:
    q = j // 2
    return kron(*([Z] * q + [X if j % 2 == 0 else Y] + [I2] * (n - q - 1)))


def _apply_generator(vec, gen, n):
    from .gaussian_core import primitive_gates
    phase, prims = primitive_gates(gen)
    for g in prims:
        if g.kind == "majorana":
            vec = apply_majorana(vec, g.j, n)
        else:
            cc = apply_majorana(apply_majorana(vec, g.k, n), g.j, n)
            vec = math.cos(g.theta / 2) * vec + math.sin(g.theta / 2) * cc
    return phase * vec


def dense_apply_gaussian(vec: np.ndarray, circ) -> np.ndarray:
    """Apply a GaussianCircuit (or a single generator) to a dense vector."""
    from .gaussian_core import GaussianGenerator
    n = int(round(math.log2(vec.shape[0])))
    if isinstance(circ, GaussianGenerator):
        return _apply_generator(vec, circ, n)
    for g in circ.gates:
        vec = _apply_generator(vec, g, n)
    return circ.phase * vec


def dense_gaussian_unitary(circ) -> np.ndarray:
    """Dense matrix of a GaussianCircuit."""
    _check_n(circ.n, 10)
    dim = 2 ** circ.n
    cols = [dense_apply_gaussian(np.eye(dim, dtype=np.complex128)[:, i], circ)
            for i in range(dim)]
    return np.stack(cols, axis=1)


def dense_state_from_gaussian(s) -> np.ndarray:
    """amp times the dense vector of a PhasedGaussianState.

    The vector is built from the annihilators of the state alone: project the
    reference basis state onto the joint kernel of ``sum_j v_j c_j`` for
    ``v`` spanning the +i eigenspace of the covariance, then normalise so that
    the reference amplitude is positive.
    """
    n = s.n
    _check_n(n)
    if s.annihilated:
        return np.zeros(2 ** n, dtype=np.complex128)
    w, v = np.linalg.eigh(1j * np.asarray(s.cov))
    B = v[:, :n]
    psi = basis_vector(s.ref)
    for col in range(n):
        b = B[:, col]
        # P = b b^dag / 2, with b = sum v_j c_j and b^dag = sum conj(v_j) c_j
        t = np.zeros_like(psi)
        for j in range(2 * n):
            if b[j] != 0:
                t += np.conj(b[j]) * apply_majorana(psi, j, n)
        u = np.zeros_like(psi)
        for j in range(2 * n):
            if b[j] != 0:
                u += b[j] * apply_majorana(t, j, n)
        psi = 0.5 * u
    ix = int("".join(str(b) for b in s.ref), 2)
    ref = psi[ix]
    if abs(ref) < 1e-300:
        raise InvalidArgument("reference basis state has zero weight")
    psi = psi / np.linalg.norm(psi) * (abs(ref) / ref)
    return s.amp * psi


# --------------------------------------------------------------------------
# named gates
# --------------------------------------------------------------------------

def cphase_matrix(theta):
    return np.diag([1, 1, 1, np.exp(1j * theta)]).astype(np.complex128)


FSWAP = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, -1]],
                 dtype=np.complex128)
SWAP = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]],
                dtype=np.complex128)

# id -> (arity, number of angle parameters)
GATE_VOCABULARY = {
    "rz": (1, 1), "rx": (1, 1), "ry": (1, 1), "h": (1, 0), "x": (1, 0),
    "y": (1, 0), "z": (1, 0), "rxx_nn": (2, 1), "ryy_nn": (2, 1),
    "rxy_nn": (2, 1), "fswap": (2, 0), "rzz": (2, 1), "cphase": (2, 1),
    "swap": (2, 0), "custom_u4": (2, None),
}


def gate_matrix(name, params=()):
    """Local matrix of a vocabulary gate (before embedding)."""
    if name not in GATE_VOCABULARY:
        raise InvalidArgument(f"unknown gate id {name!r}")
    arity, npar = GATE_VOCABULARY[name]
    params = tuple(params)
    if npar is not None and len(params) != npar:
        raise InvalidArgument(f"gate {name} takes {npar} parameter(s), got {len(params)}")
    th = params[0] if params else None
    table = {
        "rz": lambda: rot(Z, th), "rx": lambda: rot(X, th), "ry": lambda: rot(Y, th),
        "h": lambda: H.copy(), "x": lambda: X.copy(), "y": lambda: Y.copy(),
        "z": lambda: Z.copy(),
        "rxx_nn": lambda: rot(kron(X, X), th), "ryy_nn": lambda: rot(kron(Y, Y), th),
        "rxy_nn": lambda: rot(kron(X, Y), th), "fswap": lambda: FSWAP.copy(),
        "rzz": lambda: rot(kron(Z, Z), th), "cphase": lambda: cphase_matrix(th),
        "swap": lambda: SWAP.copy(),
    }
    if name == "custom_u4":
        U = np.asarray(params[0] if len(params) == 1 else params, dtype=np.complex128)
        if U.size != 16:
            raise InvalidArgument("custom_u4 needs 16 complex entries")
        return U.reshape(4, 4)
    return table[name]()


def apply_local(vec: np.ndarray, U: np.ndarray, targets, n: int) -> np.ndarray:
    """Apply a 2^k x 2^k matrix to ``targets`` (in the matrix's qubit order)."""
    targets = list(targets)
    k = len(targets)
    if len(set(targets)) != k or any(t < 0 or t >= n for t in targets):
        raise InvalidArgument(f"bad targets {targets} for n={n}")
    psi = vec.reshape([2] * n)
    psi = np.moveaxis(psi, targets, list(range(k)))
    shape = psi.shape
    psi = (U @ psi.reshape(2 ** k, -1)).reshape(shape)
    return np.moveaxis(psi, list(range(k)), targets).reshape(-1)


def embed(U: np.ndarray, targets, n: int) -> np.ndarray:
    """Full 2^n matrix of a local operator."""
    dim = 2 ** n
    eye = np.eye(dim, dtype=np.complex128)
    return np.stack([apply_local(eye[:, i], U, targets, n) for i in range(dim)], axis=1)


def dense_apply_circuit(state: np.ndarray, gates) -> np.ndarray:
    """Apply a list of ``(gate id, params, targets)`` to a dense vector."""
    vec = np.asarray(state, dtype=np.complex128)
    n = int(round(math.log2(vec.shape[0])))
    _check_n(n)
    for name, params, targets in gates:
        U = gate_matrix(name, params)
        if U.shape[0] != 2 ** len(targets):
            raise InvalidArgument(f"gate {name} expects {int(math.log2(U.shape[0]))} target(s)")
        vec = apply_local(vec, U, targets, n)
    return vec


# --------------------------------------------------------------------------
# channels
# --------------------------------------------------------------------------

def decomposition_matrix(decomp) -> np.ndarray:
    """sum_j c_j dense(K_j) for a UnitaryDecomposition."""
    _check_n(decomp.n, 10)
    dim = 2 ** decomp.n
    out = np.zeros((dim, dim), dtype=np.complex128)
    for c, circ in decomp.terms:
        out += c * dense_gaussian_unitary(circ)
    return out


def projector(qubit, outcome, n):
    P = np.diag([1.0, 0.0]) if outcome == 0 else np.diag([0.0, 1.0])
    return embed(P.astype(np.complex128), [qubit], n)


def kraus_operators(branch, n):
    """Dense Kraus operators of an AdaptiveBranch."""
    ops = []
    for spec, circ in branch.kraus:
        P = np.eye(2 ** n, dtype=np.complex128)
        for q, m in _specs(spec):
            P = projector(q, m, n) @ P
        ops.append(dense_gaussian_unitary(circ) @ P)
    return ops


def _specs(spec):
    if len(spec) and isinstance(spec[0], (tuple, list)):
        return list(spec)
    return [tuple(spec)]


def channel_kraus_sum(ch):
    """List of (weight, dense operator) with channel(rho) = sum w K rho K^dag."""
    out = []
    for br in ch.branches:
        if br.kind == "unitary":
            out.append((br.prob, decomposition_matrix(br.decomp)))
        else:
            for K in kraus_operators(br.adaptive, ch.n):
                out.append((br.prob, K))
    return out


def channel_transfer_matrix(ch) -> np.ndarray:
    """sum_b p_b K_b (x) conj(K_b); acts on row-major vec(rho)."""
    if ch.n > 3:
        raise ResourceLimit("transfer matrices limited to 3 qubits",
                            requested=ch.n, limit=3)
    dim = 2 ** ch.n
    T = np.zeros((dim * dim, dim * dim), dtype=np.complex128)
    for w, K in channel_kraus_sum(ch):
        T += w * np.kron(K, K.conj())
    return T


def unitary_transfer_matrix(U):
    return np.kron(U, U.conj())


def trace_preserving_defect(T) -> float:
    """max |T^dag vec(I) - vec(I)|, zero for trace-preserving maps."""
    dim = int(round(math.sqrt(T.shape[0])))
    vI = np.eye(dim).reshape(-1)
    return float(np.max(np.abs(T.conj().T @ vI - vI)))


PSI_PLUS = np.array([1, 0, 0, 1], dtype=np.complex128) / math.sqrt(2)


def choi_from_kraus(kraus_weighted, arity):
    """Choi state in the sandwich layout for a map given as weighted Kraus ops."""
    if arity == 1:
        g = PSI_PLUS
        targets, n = [1], 2
    elif arity == 2:
        g = np.kron(PSI_PLUS, PSI_PLUS)
        targets, n = [1, 2], 4
    else:
        raise InvalidArgument("Choi states are defined for 1- or 2-qubit channels")
    rho = np.zeros((2 ** n, 2 ** n), dtype=np.complex128)
    for w, K in kraus_weighted:
        v = apply_local(g, K, targets, n)
        rho += w * np.outer(v, v.conj())
    return rho


def channel_choi_state(ch) -> np.ndarray:
    """Choi state with the channel acting on the middle qubits."""
    if ch.n not in (1, 2):
        raise InvalidArgument("Choi states are defined for 1- or 2-qubit channels")
    return choi_from_kraus(channel_kraus_sum(ch), ch.n)


def permute_qubits(op: np.ndarray, perm) -> np.ndarray:
    """Reorder the qubits of a vector or square matrix: new qubit i = old perm[i]."""
    perm = list(perm)
    n = len(perm)
    if op.ndim == 1:
        return np.transpose(op.reshape([2] * n), perm).reshape(-1)
    t = op.reshape([2] * (2 * n))
    return np.transpose(t, perm + [p + n for p in perm]).reshape(2 ** n, 2 ** n)


def choi_to_textbook(rho: np.ndarray) -> np.ndarray:
    """Sandwich layout (a, out1, out2, b) to (a, b, out1, out2)."""
    if rho.shape[0] == 16:
        return permute_qubits(rho, [0, 3, 1, 2])
    return rho


def choi_from_textbook(rho: np.ndarray) -> np.ndarray:
    if rho.shape[0] == 16:
        return permute_qubits(rho, [0, 2, 3, 1])
    return rho


def trace_distance(a: np.ndarray, b: np.ndarray, tol: float = 1e-10) -> float:
    """Schatten-1 norm of a - b for Hermitian a and b."""
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    if a.shape != b.shape:
        raise InvalidArgument("operators differ in shape")
    for m in (a, b):
        if np.max(np.abs(m - m.conj().T), initial=0.0) > tol:
            raise InvalidArgument("trace_distance needs Hermitian operators")
    d = a - b
    return float(np.sum(np.abs(np.linalg.eigvalsh(0.5 * (d + d.conj().T)))))
