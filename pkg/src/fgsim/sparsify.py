"""Random sparsification of Gaussian superpositions and decomposed circuits.

Every random draw is addressed by ``(seed, tag, sample i, gate t)``: the
uniform for cell ``(i, t)`` sits at a fixed position of a Philox stream, so a
worker holding only a slice of the samples reproduces the sequential output.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .decomp_channel import AdaptiveBranch
from .decomp_unitary import StateDecomposition, UnitaryDecomposition
from .errors import InvalidArgument
from .gaussian_core import GaussianCircuit, PhasedGaussianState, apply_circuit, overlap, project
from .rng import keyed_rng


@dataclass(frozen=True)
class SparseSuperposition:
    """``sum_m coeff_m |state_m>`` over ``n`` qubits."""

    n: int
    terms: tuple

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple((complex(c), s) for c, s in self.terms))

    @property
    def k(self) -> int:
        return len(self.terms)

    @property
    def l1_norm(self) -> float:
        return float(sum(abs(c) * s.norm for c, s in self.terms))

    def scaled(self, factor) -> "SparseSuperposition":
        return SparseSuperposition(self.n, tuple((c * factor, s) for c, s in self.terms))


@dataclass(frozen=True)
class SparsifiedKrausPattern:
    """Gate choices shared by every measurement trajectory.

    ``gate_choices[i, t]`` is the term index picked for unitary element ``t`` in
    sample ``i``; ``phases[i]`` is the product of the picked coefficient phases.
    """

    k: int
    gate_choices: np.ndarray
    phases: np.ndarray
    global_scale: float
    skeleton: tuple

    @property
    def unitary_positions(self):
        return [i for i, el in enumerate(self.skeleton) if isinstance(el, UnitaryDecomposition)]


def _terms(decomp):
    if isinstance(decomp, (StateDecomposition, UnitaryDecomposition, SparseSuperposition)):
        return list(decomp.terms)
    return list(decomp)


def _n_of(terms):
    obj = terms[0][1]
    return obj.n


def uniforms(seed, tag, k, T) -> np.ndarray:
    """``k x T`` uniforms; cell ``(i, t)`` is stream position ``i * T + t``."""
    return keyed_rng(seed, tag).random((k, T))


def uniforms_slice(seed, tag, rows, T) -> np.ndarray:
    """Rows ``rows.start:rows.stop`` of :func:`uniforms` without drawing the rest."""
    rng = keyed_rng(seed, tag)
    # one 64-bit word per double; a Philox counter step yields four words
    pos = rows.start * T
    rng.bit_generator.advance(pos // 4)
    rng.random(pos % 4)
    return rng.random((rows.stop - rows.start, T))


def _pick(weights, u):
    cdf = np.cumsum(weights)
    cdf /= cdf[-1]
    return np.minimum(np.searchsorted(cdf, u, side="right"), len(weights) - 1)


def sparsify_state(decomp, k: int, seed) -> SparseSuperposition:
    """k i.i.d. terms drawn with probability ``|c_j| / ||c||_1``, scaled by ``||c||_1 / k``."""
    terms = _terms(decomp)
    if not terms:
        raise InvalidArgument("empty decomposition")
    k = int(k)
    if k < 1:
        raise InvalidArgument("k must be at least 1")
    mags = np.array([abs(c) for c, _ in terms])
    l1 = float(mags.sum())
    if l1 <= 0:
        raise InvalidArgument("decomposition has zero L1 norm")
    idx = _pick(mags, uniforms(seed, "sparsify_state", k, 1)[:, 0])
    scale = l1 / k
    out = [(scale * terms[j][0] / mags[j], terms[j][1]) for j in idx]
    return SparseSuperposition(_n_of(terms), tuple(out))


def _choices(decomps, k, seed, tag):
    T = len(decomps)
    u = uniforms(seed, tag, k, max(T, 1))
    choices = np.zeros((k, T), dtype=np.int64)
    phases = np.ones(k, dtype=np.complex128)
    scale = 1.0
    for t, d in enumerate(decomps):
        if not d.terms:
            raise InvalidArgument(f"decomposition {t} has no terms")
        coeffs = np.array([c for c, _ in d.terms])
        mags = np.abs(coeffs)
        choices[:, t] = _pick(mags, u[:, t])
        phases *= coeffs[choices[:, t]] / mags[choices[:, t]]
        scale *= float(mags.sum())
    return choices, phases, scale / k


def sparsify_circuit(decomps, k: int, seed):
    """k sampled Gaussian circuits (phases folded in) and the common scale.

    ``sum_i scale * circuits[i]`` is an unbiased estimate of the product of the
    decomposed gates, first gate applied first.
    """
    decomps = list(decomps)
    k = int(k)
    if k < 1:
        raise InvalidArgument("k must be at least 1")
    if not decomps:
        raise InvalidArgument("no gates to sparsify")
    n = decomps[0].n
    choices, phases, scale = _choices(decomps, k, seed, "sparsify_circuit")
    circuits = []
    for i in range(k):
        gates = []
        ph = complex(phases[i])
        for t, d in enumerate(decomps):
            circ = d.terms[choices[i, t]][1]
            gates.extend(circ.gates)
            ph *= circ.phase
        circuits.append(GaussianCircuit(n, tuple(gates), ph))
    return circuits, scale


def sparsify_adaptive(circuit, k: int, seed) -> SparsifiedKrausPattern:
    """Sample the ``k x T`` gate pattern once for a mixed unitary/Kraus sequence."""
    skeleton = tuple(circuit)
    for el in skeleton:
        if not isinstance(el, (UnitaryDecomposition, AdaptiveBranch)):
            raise InvalidArgument(f"unsupported element {type(el).__name__}")
    k = int(k)
    if k < 1:
        raise InvalidArgument("k must be at least 1")
    decomps = [el for el in skeleton if isinstance(el, UnitaryDecomposition)]
    if decomps:
        choices, phases, scale = _choices(decomps, k, seed, "sparsify_circuit")
    else:
        choices = np.zeros((k, 0), dtype=np.int64)
        phases, scale = np.ones(k, dtype=np.complex128), 1.0 / k
    choices.setflags(write=False)
    phases.setflags(write=False)
    return SparsifiedKrausPattern(k, choices, phases, scale, skeleton)


def pattern_operator_terms(pattern: SparsifiedKrausPattern, outcomes):
    """Per-sample ``(coeff, op list)`` for the Kraus trajectory ``outcomes``.

    ``op list`` entries are GaussianCircuits or ``(qubit, outcome)`` projectors,
    in application order.  ``outcomes[a]`` picks the Kraus operator of the
    ``a``-th adaptive element.
    """
    outcomes = list(outcomes)
    out = []
    for i in range(pattern.k):
        ops = []
        t = a = 0
        for el in pattern.skeleton:
            if isinstance(el, UnitaryDecomposition):
                ops.append(el.terms[pattern.gate_choices[i, t]][1])
                t += 1
            else:
                spec, circ = el.kraus[outcomes[a]]
                ops.append(tuple(spec))
                ops.append(circ)
                a += 1
        out.append((pattern.global_scale * complex(pattern.phases[i]), ops))
    return out


def apply_pattern(pattern: SparsifiedKrausPattern, initial: PhasedGaussianState, outcomes):
    """``S_m |initial>`` as a superposition for trajectory ``outcomes``."""
    terms = []
    for coeff, ops in pattern_operator_terms(pattern, outcomes):
        st = initial
        for op in ops:
            if isinstance(op, GaussianCircuit):
                st = apply_circuit(st, op)
            else:
                st = project(st, *op)
        terms.append((coeff, st))
    return SparseSuperposition(initial.n, tuple(terms))


def trajectories(pattern: SparsifiedKrausPattern):
    """All Kraus outcome tuples of the adaptive elements."""
    sizes = [len(el.kraus) for el in pattern.skeleton if isinstance(el, AdaptiveBranch)]
    grids = np.indices(sizes).reshape(len(sizes), -1).T if sizes else np.zeros((1, 0), int)
    return [tuple(int(v) for v in row) for row in grids]


# --------------------------------------------------------------------------
# statistics
# --------------------------------------------------------------------------

def _inner(psi, state):
    """<psi|state> for a dense vector or a superposition ``psi``."""
    if isinstance(psi, np.ndarray):
        from .oracle import dense_state_from_gaussian
        return complex(np.vdot(psi, dense_state_from_gaussian(state)))
    if isinstance(psi, PhasedGaussianState):
        return overlap(psi, state)
    return complex(sum(np.conj(c) * overlap(s, state) for c, s in _terms(psi)))


def _psi_norm2(psi):
    if isinstance(psi, np.ndarray):
        return float(np.vdot(psi, psi).real)
    if isinstance(psi, PhasedGaussianState):
        return psi.norm ** 2
    terms = _terms(psi)
    return float(sum(np.conj(ca) * cb * overlap(a, b)
                     for ca, a in terms for cb, b in terms).real)


def c_tilde(decomp, psi) -> float:
    """``||c||_1 sum_j |c_j| |<psi|phi_j>|^2`` with ``psi`` normalised first.

    ``psi`` may be a dense vector, a Gaussian state or a superposition.
    """
    terms = _terms(decomp)
    nrm = math.sqrt(_psi_norm2(psi))
    l1 = sum(abs(c) for c, _ in terms)
    return float(l1 * sum(abs(c) * abs(_inner(psi, s)) ** 2 for c, s in terms) / nrm ** 2)


def c_tilde_adaptive(weights, overlaps) -> float:
    """``||c||_1 sum_w |c_w| |sum_m <psi_m|phi_{m,w}>|^2``.

    ``weights[w] = |c_w|``; ``overlaps[w][m] = <psi_m|phi_{m,w}>``.
    """
    w = np.abs(np.asarray(weights, dtype=np.complex128))
    s = np.abs(np.asarray(overlaps, dtype=np.complex128).sum(axis=1)) ** 2
    return float(w.sum() * np.dot(w, s))


def critical_precision(c_tilde_value, l1sq) -> float:
    return 8.0 * (c_tilde_value - 1.0) / l1sq


def choose_rank(E, delta, c_tilde=None, l1sq=None) -> int:
    """Number of sparsified terms for precision ``delta``.

    Below the critical precision (needs ``c_tilde`` and ``l1sq``) the refined
    count ``4 l1sq ((C-1)/(delta l1sq) + 1/delta) + 1`` is used, else ``ceil(4E/delta)``.
    """
    delta = float(delta)
    if not delta > 0 or not math.isfinite(delta):
        raise InvalidArgument(f"delta must be positive, got {delta}")
    if c_tilde is not None:
        if l1sq is None:
            l1sq = E
        if delta <= critical_precision(c_tilde, l1sq):
            return int(math.ceil(4 * l1sq * ((c_tilde - 1) / (delta * l1sq) + 1 / delta) + 1))
    return int(math.ceil(4 * E / delta - 1e-9))


def expected_trace(l1sq, k) -> float:
    """Mean squared norm of a k-term sparsification."""
    return 1.0 + (l1sq - 1.0) / k


def variance_bound(c_tilde_value, l1sq, k) -> float:
    """Finite-k upper bound on the variance of the sparsified squared norm."""
    C, k = float(c_tilde_value), float(k)
    return (4 * (1 / k - 3 / k ** 2 + 2 / k ** 3) * C
            + 2 * l1sq ** 2 * (1 / k ** 2 - 1 / k ** 3)
            - (4 / k - 10 / k ** 2 + 6 / k ** 3))


def variance_bound_leading(c_tilde_value, l1sq, k) -> float:
    """The same bound without its O(C/k^3) tail."""
    C = float(c_tilde_value)
    return 4 * (C - 1) / k + 2 * (l1sq / k) ** 2 + (10 - 12 * C) / k ** 2


def ensemble_bound(l1sq, k, variance) -> float:
    """Trace-distance bound ``2 l1sq / k + sqrt(var)`` for the normalised ensemble."""
    return 2 * l1sq / k + math.sqrt(max(variance, 0.0))
