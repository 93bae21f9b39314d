"""Numeric certificates: witness values, sandwich chains, Gaussian fidelity anchors, Z-twirl.

Witness validity can only be sampled: a witness ``omega`` is accepted when no
sampled Gaussian state ``phi`` gives ``|<omega|phi>| > 1 + tol``.  Reports call
this "sampled validity".
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from . import oracle as O
from .decomp_channel import ChannelDecomposition
from .errors import InvalidArgument
from .gaussian_core import GaussianGenerator, PhasedGaussianState
from .rng import keyed_rng

#: slack allowed on witness constraints
WITNESS_TOL = 1e-9


@dataclass(frozen=True)
class WitnessReport:
    witness_id: str
    validity: bool
    value: float
    claimed: float | None
    max_gaussian_overlap: float
    samples: int
    kind: str = "sampled validity"

    @property
    def matches_claim(self) -> bool:
        return self.claimed is None or abs(self.value - self.claimed) <= 1e-9


def _n_of(vec) -> int:
    n = int(round(math.log2(vec.shape[0])))
    if 2 ** n != vec.shape[0]:
        raise InvalidArgument("dimension is not a power of two")
    return n


def random_gaussian_vectors(n, count, seed, depth=None):
    """Dense random Gaussian states: random Majorana-pair rotations on a random basis state.

    All samples advance together; step ``s`` applies ``exp(theta/2 c_j c_k)``
    with its own ``(j, k, theta)`` per sample.
    """
    depth = 10 * n if depth is None else depth
    rng = keyed_rng(seed, "gaussian_samples", n, depth)
    dim = 2 ** n
    bits = rng.integers(0, 2, (count, n))
    idx = bits @ (1 << np.arange(n - 1, -1, -1))
    vecs = np.zeros((count, dim), dtype=np.complex128)
    vecs[np.arange(count), idx] = 1.0
    if n == 1:
        pairs = np.zeros((count, depth, 2), dtype=np.int64)
        pairs[..., 1] = 1
    else:
        first = rng.integers(0, 2 * n, (count, depth))
        second = (first + rng.integers(1, 2 * n, (count, depth))) % (2 * n)
        pairs = np.stack([first, second], axis=-1)
    angles = rng.uniform(0, 2 * math.pi, (count, depth))
    maj = [O.majorana_matrix(j, n) for j in range(2 * n)]
    prods = np.array([[maj[j] @ maj[k] for k in range(2 * n)] for j in range(2 * n)])
    for s in range(depth):
        M = prods[pairs[:, s, 0], pairs[:, s, 1]]
        half = angles[:, s, None] / 2
        vecs = np.cos(half) * vecs + np.sin(half) * np.einsum("sab,sb->sa", M, vecs)
    return vecs


def max_gaussian_overlap(omega, samples=10_000, seed=0) -> float:
    """Largest ``|<omega|phi>|`` over sampled Gaussian states."""
    omega = np.asarray(omega, dtype=np.complex128)
    phis = random_gaussian_vectors(_n_of(omega), int(samples), seed)
    return float(np.max(np.abs(phis @ omega.conj())))


def extent_witness_check(omega, target, gaussian_samples=10_000, seed=0, claimed=None,
                         witness_id="omega") -> WitnessReport:
    """``|<omega|target>|^2`` with sampled validity of ``omega`` as an extent witness."""
    omega = np.asarray(omega, dtype=np.complex128)
    target = np.asarray(target, dtype=np.complex128)
    n = _n_of(omega)
    if n > 10:
        raise InvalidArgument("witness checks are limited to 10 qubits")
    if target.shape != omega.shape:
        raise InvalidArgument("witness and target sizes differ")
    worst = max_gaussian_overlap(omega, gaussian_samples, seed)
    value = float(abs(np.vdot(omega, target)) ** 2)
    return WitnessReport(witness_id, worst <= 1 + WITNESS_TOL, value,
                         None if claimed is None else float(claimed), worst,
                         int(gaussian_samples))


def dyadic_witness_value(W, rho) -> float:
    """``tr[W rho]`` for a Hermitian witness."""
    W = np.asarray(W, dtype=np.complex128)
    rho = np.asarray(rho, dtype=np.complex128)
    if W.shape != rho.shape:
        raise InvalidArgument("witness and state sizes differ")
    if np.max(np.abs(W - W.conj().T)) > 1e-12 * max(1.0, np.max(np.abs(W))):
        raise InvalidArgument("witness is not Hermitian")
    return float(np.real(np.trace(W @ rho)))


# --------------------------------------------------------------------------
# witnesses used by the noisy-rotation lower bounds
# --------------------------------------------------------------------------

def single_qubit_witness(alpha: float = 0.0) -> np.ndarray:
    """``|0> + e^{i alpha}|1>``; alpha = 0 or pi gives the Y-rotation witnesses."""
    return np.array([1.0, np.exp(1j * alpha)], dtype=np.complex128)


def zz_witness(sign: int = 1) -> np.ndarray:
    """``(|0000> + |1111> + sign*i(|0011> + |1100>)) / sqrt 2``."""
    w = np.zeros(16, dtype=np.complex128)
    w[0b0000] = w[0b1111] = 1.0
    w[0b0011] = w[0b1100] = sign * 1j
    return w / math.sqrt(2)


def u_state(vartheta: float) -> np.ndarray:
    """``(|0000> + |1111> + e^{i vartheta}(|0011> + |1100>)) / 2``."""
    u = np.zeros(16, dtype=np.complex128)
    u[0b0000] = u[0b1111] = 0.5
    u[0b0011] = u[0b1100] = 0.5 * np.exp(1j * vartheta)
    return u


def zz_witness_for(phi: float) -> np.ndarray:
    """The ZZ witness whose sign matches ``sin(phi)``."""
    return zz_witness(1 if math.sin(phi) >= 0 else -1)


def y_witness_for(theta: float) -> np.ndarray:
    return single_qubit_witness(0.0 if math.sin(theta) >= 0 else math.pi)


def dyad(vec) -> np.ndarray:
    vec = np.asarray(vec, dtype=np.complex128)
    return np.outer(vec, vec.conj())


def witness_candidates(n: int, rho=None):
    """Named rank-one witnesses (plus the identity) for an ``n``-qubit output."""
    cands = [("identity", np.eye(2 ** n, dtype=np.complex128))]
    if n == 1:
        alphas = [0.0, math.pi, math.pi / 2, -math.pi / 2]
        if rho is not None and abs(rho[0, 1]) > 0:
            alphas.append(float(np.angle(rho[1, 0])))
        cands += [(f"single_qubit({a:.6g})", dyad(single_qubit_witness(a))) for a in alphas]
    elif n == 4:
        cands += [("zz(+)", dyad(zz_witness(1))), ("zz(-)", dyad(zz_witness(-1)))]
    return cands


def apply_channel(ch: ChannelDecomposition, rho, qubits=None) -> np.ndarray:
    """Dense output of a decomposed channel on ``rho``, acting on ``qubits``."""
    rho = np.asarray(rho, dtype=np.complex128)
    n = _n_of(rho[0])
    qubits = tuple(range(ch.n)) if qubits is None else tuple(qubits)
    out = np.zeros_like(rho)
    for w, K in O.channel_kraus_sum(ch):
        Kf = K if len(qubits) == n and qubits == tuple(range(n)) else O.embed(K, qubits, n)
        out += w * Kf @ rho @ Kf.conj().T
    return out


def sandwich_bounds(channel: ChannelDecomposition, g, qubits=None):
    """``(witness lower bound, decomposition cost)`` for the channel applied to ``g``.

    ``g`` is a PhasedGaussianState or dense vector.  A one-qubit channel acts
    on qubit 0 of ``g``; a two-qubit channel on a four-qubit ``g`` acts on the
    middle qubits.
    """
    vec = O.dense_state_from_gaussian(g) if isinstance(g, PhasedGaussianState) else \
        np.asarray(g, dtype=np.complex128)
    n = _n_of(vec)
    if qubits is None:
        if channel.n == n:
            qubits = tuple(range(n))
        elif channel.n == 2 and n == 4:
            qubits = (1, 2)
        elif channel.n == 1:
            qubits = (0,)
        else:
            raise InvalidArgument("cannot place the channel on the given state")
    rho = apply_channel(channel, dyad(vec), qubits)
    lower = max(dyadic_witness_value(W, rho) for _, W in witness_candidates(n, rho))
    upper = float(channel.cost)
    if lower > upper + 1e-9:
        raise AssertionError(f"sandwich chain inverted: {lower} > {upper}")
    return lower, upper


def bell_pairs_state(pairs: int = 2) -> np.ndarray:
    """``|psi+>`` on consecutive qubit pairs."""
    vec = np.array([1.0 + 0j])
    for _ in range(pairs):
        vec = np.kron(vec, O.PSI_PLUS)
    return vec


# --------------------------------------------------------------------------
# fidelity anchor
# --------------------------------------------------------------------------

def parity_states(t: int):
    """Normalised even and odd parts of ``|+>^t``."""
    idx = np.arange(2 ** t)
    odd = np.array([bin(i).count("1") & 1 for i in idx], dtype=bool)
    e = np.where(odd, 0.0, 1.0).astype(np.complex128)
    o = np.where(odd, 1.0, 0.0).astype(np.complex128)
    return e / np.linalg.norm(e), o / np.linalg.norm(o)


def plus_state_fidelity(t: int, samples: int = 0, seed=0):
    """``(anchor, sampled max)`` of ``|<phi|+^t>|^2`` over Gaussian ``phi``.

    The anchor maximises over the even and odd parity parts; the sampled
    maximum (0 when ``samples`` is 0) must not exceed it.
    """
    plus = np.full(2 ** t, 2 ** (-t / 2), dtype=np.complex128)
    anchor = max(abs(np.vdot(c, plus)) ** 2 for c in parity_states(t))
    sampled = 0.0
    if samples:
        phis = random_gaussian_vectors(t, int(samples), seed)
        sampled = float(np.max(np.abs(phis.conj() @ plus) ** 2))
    return float(anchor), sampled


# --------------------------------------------------------------------------
# Z-twirl
# --------------------------------------------------------------------------

def _z_string_diag(bits, m):
    signs = np.ones(2 ** m)
    idx = np.arange(2 ** m)
    for q, b in enumerate(bits):
        if b:
            signs *= 1 - 2 * ((idx >> (m - 1 - q)) & 1)
    return signs


def z_twirl(T: np.ndarray) -> np.ndarray:
    """Average of ``Z_s T Z_s`` over every Z string on the transfer-matrix qubits."""
    m = _n_of(T[0])
    acc = np.zeros_like(T, dtype=np.complex128)
    for bits in itertools.product((0, 1), repeat=m):
        d = _z_string_diag(bits, m)
        acc += d[:, None] * T * d[None, :]
    return acc / 2 ** m


def z_twirl_trace_check(U):
    """``(is_diagonal, defect)`` with defect ``max |T'^*(I) - I|`` for the twirled transfer matrix."""
    U = np.asarray(U, dtype=np.complex128)
    n = _n_of(U[0])
    if n > 3:
        raise InvalidArgument("Z-twirl check is limited to 3 qubits")
    if np.max(np.abs(U.conj().T @ U - np.eye(2 ** n))) > 1e-10:
        raise InvalidArgument("U is not unitary")
    Tp = z_twirl(O.unitary_transfer_matrix(U))
    defect = O.trace_preserving_defect(Tp)
    off = U - np.diag(np.diag(U))
    return bool(np.max(np.abs(off)) <= 1e-10), defect
