"""Bit-string samplers for Gaussian circuits with non-Gaussian gates and noisy channels.

Three modes share one engine:

* ``exact``: draw a unitary trajectory from the decomposition oracle, expand
  it fully and take each conditional bit probability as a ratio of exact norms.
* ``approx``: sparsify the trajectory to ``k = ceil(4E/delta)`` terms and use
  the sampled norm estimator; a probability above 1/2 is re-estimated from the
  complementary outcome.
* ``adaptive``: like ``approx`` but trajectories may contain
  measure-and-rotate branches whose outcomes are sampled on the fly.

Shots are addressed by index: trajectory, sparsification and bit draws for
shot ``i`` come from counter-based streams keyed by ``(seed, i)``.  With
``reuse > 1`` consecutive shots share one trajectory and sparsification (and
the norm estimates along shared prefixes), which keeps each shot's marginal
distribution but correlates shots within a group.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import oracle as O
from .decomp_channel import (AdaptiveBranch, ChannelDecomposition, DecompositionOracle,
                             EXTENT_OPTIMAL, adaptive_nzz_single_z, branch_index,
                             equimagical_noisy_rotation, general_dephasing_decomposition,
                             naive_noisy_rotation, reference_kraus, unitary_branch)
from .decomp_unitary import (UnitaryDecomposition, adjacent, circuit, cphase_decomposition,
                             decompose_two_qubit_fermionic, gaussian_decomposition,
                             hadamard_decomposition, pauli_gate, pauli_rotation_decomposition,
                             rzz_decomposition, swap_decomposition, _mg)
from .errors import InvalidArgument, InvalidState, ResourceLimit, ValidationError
from .gaussian_core import PhasedGaussianState, apply_circuit, prepare_basis_state, project
from .norm_estimation import exact_norm, fast_norm
from .sparsify import SparseSuperposition, choose_rank, sparsify_adaptive, uniforms_slice

#: largest full expansion the exact sampler will build
DEFAULT_RANK_BUDGET = 1 << 16
#: adaptive-step norms are exact up to this many distinct terms
EXACT_NORM_RANK = 4096
#: conditional probabilities closer than this to 0 or 1 are snapped
PROB_SNAP = 1e-12
#: expanded trajectories kept by the exact sampler
MEMO_TRAJECTORIES = 64

GAUSSIAN_GATES = {"rz": "rz", "x": "x", "y": "y", "z": "z", "rxx_nn": "rxx",
                  "ryy_nn": "ryy", "rxy_nn": "rxy", "fswap": "fswap"}
NON_GAUSSIAN_GATES = ("rx", "ry", "h", "rzz", "cphase", "swap", "custom_u4")
CHANNELS = ("noisy_rot", "noisy_rzz")
ROT_AXES = ("x", "y", "zz")
RZZ_NOISE = ("zz", "z1", "z2", "general")


# --------------------------------------------------------------------------
# program
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class GaussianGate:
    id: str
    targets: tuple
    params: tuple = ()


@dataclass(frozen=True)
class NonGaussianGate:
    id: str
    targets: tuple
    params: tuple = ()


@dataclass(frozen=True)
class NoisyChannel:
    """``noisy_rot`` (``axis`` x, y or zz) or ``noisy_rzz`` (``noise`` zz, z1, z2, general)."""

    id: str
    theta: float
    p: float
    targets: tuple
    axis: str | None = None
    noise: str | None = None
    adaptive: bool = False


@dataclass(frozen=True)
class AdaptiveChannel(NoisyChannel):
    """A noisy ZZ rotation simulated with a measure-and-rotate branch."""


@dataclass(frozen=True)
class TerminalMeasure:
    qubits: tuple


def make_gate(gate_id, targets, params=()):
    """GaussianGate or NonGaussianGate by id."""
    targets = tuple(int(t) for t in targets)
    params = tuple(params)
    if gate_id in GAUSSIAN_GATES:
        return GaussianGate(gate_id, targets, params)
    if gate_id in NON_GAUSSIAN_GATES:
        return NonGaussianGate(gate_id, targets, params)
    raise InvalidArgument(f"unknown gate id {gate_id!r}")


def make_channel(channel_id, theta, p, targets, axis=None, noise=None, adaptive=False):
    """NoisyChannel, or AdaptiveChannel when an adaptive branch will be used."""
    targets = tuple(int(t) for t in targets)
    cls = NoisyChannel
    if channel_id == "noisy_rzz" and adaptive and noise in ("z1", "z2", "general"):
        cls = AdaptiveChannel
    return cls(channel_id, float(theta), float(p), targets, axis, noise, bool(adaptive))


@dataclass(frozen=True)
class CircuitProgram:
    n: int
    elements: tuple
    metadata: dict | None = None

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(self.elements))
        if not isinstance(self.n, int) or self.n < 1:
            raise ValidationError(f"n must be a positive integer, got {self.n!r}")
        for i, el in enumerate(self.elements):
            _validate(el, self.n, i, i == len(self.elements) - 1)

    @property
    def body(self):
        """Elements other than the terminal measurement."""
        return tuple(el for el in self.elements if not isinstance(el, TerminalMeasure))

    @property
    def has_adaptive(self) -> bool:
        return any(isinstance(el, AdaptiveChannel) for el in self.elements)

    def measured_qubits(self, w=None, qubits=None):
        if qubits is not None:
            qs = tuple(int(q) for q in qubits)
        elif self.elements and isinstance(self.elements[-1], TerminalMeasure):
            qs = self.elements[-1].qubits
        else:
            qs = tuple(range(self.n))
        if w is not None:
            if not 1 <= int(w) <= len(qs):
                raise InvalidArgument(f"w must lie in 1..{len(qs)}")
            qs = qs[:int(w)]
        if any(not 0 <= q < self.n for q in qs) or len(set(qs)) != len(qs):
            raise InvalidArgument(f"bad measured qubits {qs}")
        return qs


def _validate(el, n, i, last):
    def targets_ok(ts, arity):
        if len(ts) != arity:
            raise ValidationError(f"expected {arity} target(s), got {len(ts)}", element=i)
        if len(set(ts)) != len(ts):
            raise ValidationError("repeated target", element=i)
        if any(not isinstance(t, (int, np.integer)) or not 0 <= t < n for t in ts):
            raise ValidationError(f"target out of range for n={n}: {list(ts)}", element=i)

    if isinstance(el, (GaussianGate, NonGaussianGate)):
        if el.id not in O.GATE_VOCABULARY:
            raise ValidationError(f"unknown gate id {el.id!r}", element=i)
        arity, npar = O.GATE_VOCABULARY[el.id]
        targets_ok(el.targets, arity)
        if npar is not None and len(el.params) != npar:
            raise ValidationError(f"gate {el.id} takes {npar} parameter(s)", element=i)
        if npar and not all(math.isfinite(float(v)) for v in el.params):
            raise ValidationError("angles must be finite", element=i)
        if el.id.endswith("_nn") or el.id == "fswap":
            if not adjacent(el.targets):
                raise ValidationError(f"{el.id} needs adjacent targets", element=i)
        if el.id == "custom_u4":
            U = O.gate_matrix("custom_u4", el.params)
            if np.max(np.abs(U.conj().T @ U - np.eye(4))) > 1e-10:
                raise ValidationError("custom_u4 is not unitary", element=i)
            if max(abs(U[a, b]) for a in (0, 3) for b in (1, 2)) > 1e-10 or \
                    max(abs(U[a, b]) for a in (1, 2) for b in (0, 3)) > 1e-10:
                raise ValidationError("custom_u4 does not preserve parity", element=i)
    elif isinstance(el, NoisyChannel):
        if el.id not in CHANNELS:
            raise ValidationError(f"unknown channel id {el.id!r}", element=i)
        if not 0.0 <= el.p <= 0.5:
            raise ValidationError(f"p must lie in [0, 1/2], got {el.p}", element=i)
        if not math.isfinite(el.theta):
            raise ValidationError("theta must be finite", element=i)
        if el.id == "noisy_rot":
            if el.axis not in ROT_AXES:
                raise ValidationError(f"axis must be one of {ROT_AXES}", element=i)
            targets_ok(el.targets, 2 if el.axis == "zz" else 1)
        else:
            if el.noise not in RZZ_NOISE:
                raise ValidationError(f"noise must be one of {RZZ_NOISE}", element=i)
            targets_ok(el.targets, 2)
    elif isinstance(el, TerminalMeasure):
        if not last:
            raise ValidationError("terminal measurement must be the last element", element=i)
        if not el.qubits:
            raise ValidationError("terminal measurement needs qubits", element=i)
        if len(set(el.qubits)) != len(el.qubits) or \
                any(not 0 <= q < n for q in el.qubits):
            raise ValidationError(f"bad measured qubits {list(el.qubits)}", element=i)
    else:
        raise ValidationError(f"unsupported element {type(el).__name__}", element=i)


# --------------------------------------------------------------------------
# decompositions of elements
# --------------------------------------------------------------------------

def _single(decomp: UnitaryDecomposition) -> ChannelDecomposition:
    return ChannelDecomposition(decomp.n, (unitary_branch(1.0, decomp),), True,
                                EXTENT_OPTIMAL if decomp.optimal else "feasible", decomp.label)


def gate_decomposition(el, n) -> UnitaryDecomposition:
    """Gaussian superposition of a program gate on ``n`` qubits."""
    t = el.targets
    th = float(el.params[0]) if el.params and el.id != "custom_u4" else None
    if isinstance(el, GaussianGate):
        name = GAUSSIAN_GATES[el.id]
        if name in ("x", "y", "z"):
            g = pauli_gate(name.upper(), t)
        elif name == "fswap":
            g = _mg("fswap", t)
        else:
            g = _mg(name, t, th)
        return gaussian_decomposition(circuit(n, [g]), el.id)
    if el.id == "rzz":
        return rzz_decomposition(th, t, n)
    if el.id == "cphase":
        return cphase_decomposition(th, t, n)
    if el.id == "swap":
        return swap_decomposition(t, n)
    if el.id == "h":
        return hadamard_decomposition(t[0], n)
    if el.id in ("rx", "ry"):
        return pauli_rotation_decomposition(el.id[1].upper(), th, t, n, True, el.id)
    U = O.gate_matrix("custom_u4", el.params)
    return decompose_two_qubit_fermionic(U, "nearest" if adjacent(t) else "nonadjacent", n, t)


def channel_decomposition(el, n) -> ChannelDecomposition:
    """Decomposition used by the oracle for a program element."""
    if isinstance(el, (GaussianGate, NonGaussianGate)):
        return _single(gate_decomposition(el, n))
    if el.id == "noisy_rot":
        return equimagical_noisy_rotation(el.axis.upper(), el.theta, el.p, el.targets, n)
    q = el.targets
    if el.noise == "zz":
        return equimagical_noisy_rotation("ZZ", el.theta, el.p, q, n)
    if el.noise == "general":
        return general_dephasing_decomposition(el.theta, el.p, el.adaptive, q, n)
    if el.adaptive:
        return adaptive_nzz_single_z(el.theta, el.p, "first" if el.noise == "z1" else "second",
                                     q, n)
    return naive_noisy_rotation("ZZ", el.theta, el.p, "ZI" if el.noise == "z1" else "IZ", q, n)


def program_oracle(program: CircuitProgram, seed=0) -> DecompositionOracle:
    """Oracle with every body element registered under itself."""
    oracle = DecompositionOracle(seed)
    for el in program.body:
        if el not in oracle.table:
            oracle.register(el, channel_decomposition(el, program.n))
    return oracle


def element_cost(el, n) -> float:
    return channel_decomposition(el, n).cost


# --------------------------------------------------------------------------
# dense reference
# --------------------------------------------------------------------------

def _element_kraus(el, n):
    if isinstance(el, (GaussianGate, NonGaussianGate)):
        return [(1.0, O.gate_matrix(el.id, el.params))]
    if el.id == "noisy_rot":
        if el.axis == "zz":
            return reference_kraus("rzz", el.theta, el.p, "zz")
        return reference_kraus(el.axis, el.theta, el.p)
    return reference_kraus("rzz", el.theta, el.p, el.noise)


def dense_output(program: CircuitProgram) -> np.ndarray:
    """Density matrix after the body acts on |0...0>, from the defining channels."""
    n = program.n
    O._check_n(n, 12)
    rho = np.zeros((2 ** n, 2 ** n), dtype=np.complex128)
    rho[0, 0] = 1.0
    for el in program.body:
        new = np.zeros_like(rho)
        for w, K in _element_kraus(el, n):
            Kf = O.embed(K, el.targets, n)
            new += w * Kf @ rho @ Kf.conj().T
        rho = new
    return rho


def dense_distribution(program: CircuitProgram, w=None, qubits=None) -> dict:
    """Exact distribution of the measured bits, keyed by bit string."""
    qs = program.measured_qubits(w, qubits)
    n = program.n
    probs = np.real(np.diag(dense_output(program))).clip(min=0.0)
    out = {}
    for idx, pr in enumerate(probs):
        if pr == 0.0:
            continue
        key = "".join(str((idx >> (n - 1 - q)) & 1) for q in qs)
        out[key] = out.get(key, 0.0) + float(pr)
    return out


def total_variation(p: dict, q: dict) -> float:
    keys = set(p) | set(q)
    return 0.5 * sum(abs(p.get(k, 0.0) - q.get(k, 0.0)) for k in keys)


# --------------------------------------------------------------------------
# evolution
# --------------------------------------------------------------------------

def evolve_circuit(decomps, initial, budget: int = DEFAULT_RANK_BUDGET) -> SparseSuperposition:
    """Full expansion of the decomposed gates applied to ``initial``.

    The output rank is the product of the decomposition ranks; exceeding
    ``budget`` raises ResourceLimit before any term is built.
    """
    decomps = list(decomps)
    if isinstance(initial, PhasedGaussianState):
        terms = [(1.0 + 0j, initial)]
        n = initial.n
    else:
        terms = list(initial.terms)
        n = initial.n
    rank = len(terms)
    for d in decomps:
        rank *= len(d.terms)
    if rank > budget:
        raise ResourceLimit(f"expansion rank {rank} exceeds budget {budget}",
                            requested=rank, limit=budget)
    for d in decomps:
        if d.n != n:
            raise InvalidArgument("decomposition size differs from the state size")
        terms = [(a * c, apply_circuit(s, circ)) for c, circ in d.terms for a, s in terms]
    return SparseSuperposition(n, tuple(terms))


# --------------------------------------------------------------------------
# report
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class SampleReport:
    bitstring: str
    probs: tuple
    k: int | None
    E: float
    seed: object
    timing: float
    shot: int = 0
    qubits: tuple = ()
    trajectory: tuple = ()
    adaptive_outcomes: tuple = ()
    adaptive_probs: tuple = ()
    additive: bool = False

    def to_dict(self, timing=True):
        d = {"bitstring": self.bitstring, "probs": list(self.probs), "k": self.k, "E": self.E,
             "seed": self.seed, "shot": self.shot, "qubits": list(self.qubits),
             "trajectory": list(self.trajectory),
             "adaptive_outcomes": list(self.adaptive_outcomes),
             "adaptive_probs": list(self.adaptive_probs), "additive": self.additive}
        if timing:
            d["timing"] = self.timing
        return d


# --------------------------------------------------------------------------
# engine
# --------------------------------------------------------------------------

def _split_budget(delta, epsilon, delta_total):
    if delta_total is not None:
        delta_total = float(delta_total)
        if not delta_total > 0:
            raise InvalidArgument("total error budget must be positive")
        return delta_total / 3.0, 2.0 * delta_total / 3.0
    if delta is None or epsilon is None:
        raise InvalidArgument("give delta and epsilon, or a total budget")
    delta, epsilon = float(delta), float(epsilon)
    if not delta > 0:
        raise InvalidArgument(f"delta must be positive, got {delta}")
    if not 0 < epsilon < 1:
        raise InvalidArgument(f"epsilon must lie in (0, 1), got {epsilon}")
    return delta, epsilon


class _Node:
    """Unnormalised state after a sequence of outcomes, with its estimated mass."""

    __slots__ = ("terms", "mass", "children", "probs")

    def __init__(self, terms, mass):
        self.terms = terms  # list of (row, coeff, state)
        self.mass = mass
        self.children = {}
        self.probs = None


class Sampler:
    """Shot-indexed sampler for one program.

    ``mode`` is ``exact``, ``approx`` or ``adaptive``.  For the approximate
    modes give ``delta`` and ``epsilon`` (or ``delta_total``, split as one
    third / two thirds) and ``p_fail``.
    """

    def __init__(self, program: CircuitProgram, mode="exact", w=None, qubits=None, seed=0,
                 delta=None, epsilon=None, p_fail=0.01, delta_total=None, reuse=1,
                 rank_budget=DEFAULT_RANK_BUDGET, exact_rank=EXACT_NORM_RANK):
        if mode not in ("exact", "approx", "adaptive"):
            raise InvalidArgument(f"unknown mode {mode!r}")
        if mode in ("exact", "approx") and program.has_adaptive:
            raise InvalidArgument(f"{mode} sampling does not support adaptive channels")
        self.program = program
        self.mode = mode
        self.n = program.n
        self.qubits = program.measured_qubits(w, qubits)
        self.seed = seed
        self.reuse = max(1, int(reuse))
        self.rank_budget = int(rank_budget)
        self.exact_rank = int(exact_rank)
        if mode != "exact":
            self.delta, self.epsilon = _split_budget(delta, epsilon, delta_total)
            self.p_fail = float(p_fail)
            if not 0 < self.p_fail < 1:
                raise InvalidArgument(f"p_fail must lie in (0, 1), got {p_fail}")
            w_bits = len(self.qubits)
            self.eps_call = self.epsilon / (3 * w_bits)
            self.pf_call = self.p_fail / (2 * w_bits + 1)
        self.oracle = program_oracle(program, seed)
        self.body = program.body
        self.channels = [self.oracle.lookup(el) for el in self.body]
        self.zero = prepare_basis_state([0] * self.n)
        self._group = None
        self._memo = {}

    # ---- trajectories -------------------------------------------------

    def trajectory(self, group: int):
        """Branch index per body element for shot group ``group``."""
        T = len(self.body)
        if T == 0:
            return ()
        u = uniforms_slice(self.seed, "trajectory", range(group, group + 1), T)[0]
        return tuple(branch_index(ch, u[t]) for t, ch in enumerate(self.channels))

    def _payloads(self, traj):
        return [self.channels[t].branches[b].payload for t, b in enumerate(traj)]

    # ---- group setup ----------------------------------------------------

    def _build_group(self, group, traj=None):
        traj = self.trajectory(group) if traj is None else traj
        payloads = self._payloads(traj)
        E = 1.0
        for p in payloads:
            if isinstance(p, UnitaryDecomposition):
                E *= p.l1_norm ** 2
        cache = {}
        if self.mode == "exact":
            rank = 1
            for p in payloads:
                rank *= len(p.terms)
            if rank > self.rank_budget:
                raise ResourceLimit(f"expansion rank {rank} exceeds budget {self.rank_budget}",
                                    requested=rank, limit=self.rank_budget)
            rows = list(itertools.product(*[range(len(p.terms)) for p in payloads]))
            coeffs = [complex(np.prod([payloads[t].terms[r[t]][0] for t in range(len(r))]))
                      for r in rows]
            k = None
            unitary_ts = list(range(len(payloads)))
            decomps = payloads
        else:
            k = choose_rank(E, self.delta)
            skeleton = payloads
            pattern = sparsify_adaptive(skeleton, k, (self.seed, group))
            decomps = [p for p in payloads if isinstance(p, UnitaryDecomposition)]
            uniq, inverse = np.unique(pattern.gate_choices, axis=0, return_inverse=True)
            inverse = np.asarray(inverse).reshape(-1)
            sums = np.zeros(len(uniq), dtype=np.complex128)
            np.add.at(sums, inverse, pattern.phases)
            rows = [tuple(int(v) for v in r) for r in uniq]
            coeffs = list(pattern.global_scale * sums)
            unitary_ts = None
        # segments: unitary positions between adaptive elements
        segments, kraus = [[]], []
        t = 0
        for p in payloads:
            if isinstance(p, AdaptiveBranch):
                kraus.append(p)
                segments.append([])
            else:
                segments[-1].append(t)
                t += 1
        self._group = dict(index=group, traj=traj, E=E, k=k, decomps=decomps,
                           segments=segments, kraus=kraus, cache=cache, root=None)
        terms = [(r, c, self.zero) for r, c in zip(rows, coeffs) if c != 0]
        terms = self._apply_segment(terms, 0)
        root = _Node(terms, None)
        root.mass = self._norm(root.terms, ("root",), final=not kraus)
        self._group["root"] = root
        return self._group

    def _apply_segment(self, terms, s):
        g = self._group
        cache = g["cache"]
        out = []
        for row, c, st in terms:
            for t in g["segments"][s]:
                choice = row[t]
                key = (id(st), t, choice)
                hit = cache.get(key)
                if hit is None:
                    new = apply_circuit(st, g["decomps"][t].terms[choice][1])
                    cache[key] = (new, st)
                    st = new
                else:
                    st = hit[0]
            out.append((row, c, st))
        return out

    def _project_terms(self, terms, qubit, outcome, then=None):
        cache = self._group["cache"]
        out = []
        for row, c, st in terms:
            key = ("proj", id(st), qubit, outcome, id(then))
            hit = cache.get(key)
            if hit is None:
                new = project(st, qubit, outcome)
                if then is not None and not new.annihilated:
                    new = apply_circuit(new, then)
                cache[key] = (new, st)
            else:
                new = hit[0]
            if not new.annihilated:
                out.append((row, c, new))
        return out

    def _norm(self, terms, path, final=True, prefer_exact=False):
        sup = SparseSuperposition(self.n, tuple((c, s) for _, c, s in terms))
        if not terms:
            return 0.0
        if self.mode == "exact" or (prefer_exact and
                                    len({id(s) for _, _, s in terms}) <= self.exact_rank):
            return exact_norm(sup)
        est = fast_norm(sup, self.eps_call, self.pf_call,
                        (self.seed, self._group["index"], path))
        if est.additive:
            self._additive = True
        return est.value

    # ---- probabilities ---------------------------------------------------

    def _bit_probs(self, node, b, path):
        """Probability of 0 for measured bit ``b`` at ``node``."""
        if node.probs is not None:
            return node.probs
        q = self.qubits[b]
        if node.mass <= 0.0:
            raise InvalidState("conditional state has zero norm")
        t0 = self._project_terms(node.terms, q, 0)
        n0 = self._norm(t0, path + (0,))
        p0 = n0 / node.mass
        t1 = None
        if self.mode != "exact" and p0 > 0.5:
            t1 = self._project_terms(node.terms, q, 1)
            p0 = 1.0 - self._norm(t1, path + (1,)) / node.mass
        p0 = min(1.0, max(0.0, p0))
        if p0 < PROB_SNAP:
            p0 = 0.0
        elif p0 > 1.0 - PROB_SNAP:
            p0 = 1.0
        node.probs = (p0, t0, t1)
        return node.probs

    def _child(self, node, b, bit, path):
        if bit in node.children:
            return node.children[bit]
        p0, t0, t1 = node.probs
        if bit == 0:
            terms = t0
        else:
            terms = t1 if t1 is not None else self._project_terms(node.terms, self.qubits[b], 1)
        child = _Node(terms, node.mass * (p0 if bit == 0 else 1.0 - p0))
        node.children[bit] = child
        return child

    def _adaptive_step(self, node, a, path):
        """Outcome probabilities of adaptive element ``a`` and the children."""
        if node.probs is not None:
            return node.probs
        branch = self._group["kraus"][a]
        kids = []
        norms = []
        for spec, circ in branch.kraus:
            q, m = spec if not isinstance(spec[0], tuple) else spec[0]
            terms = self._project_terms(node.terms, q, m, then=circ)
            terms = self._apply_segment(terms, a + 1)
            nv = self._norm(terms, path + (len(kids),), prefer_exact=True)
            kids.append(terms)
            norms.append(nv)
        total = sum(norms)
        if total <= 0.0:
            raise InvalidState("adaptive step has zero total weight")
        probs = [v / total for v in norms]
        node.probs = (probs, kids, norms)
        return node.probs

    # ---- shots -------------------------------------------------------------

    def shot(self, index: int) -> SampleReport:
        t_start = time.perf_counter()
        self._additive = False
        group = index // self.reuse
        if self.mode == "exact":
            # the expansion depends only on the trajectory, so keep it across shots
            traj = self.trajectory(group)
            if traj not in self._memo:
                if len(self._memo) >= MEMO_TRAJECTORIES:
                    self._memo.pop(next(iter(self._memo)))
                self._memo[traj] = self._build_group(group, traj)
            self._group = self._memo[traj]
        elif self._group is None or self._group["index"] != group:
            self._build_group(group)
        g = self._group
        n_ad = len(g["kraus"])
        w = len(self.qubits)
        u = uniforms_slice(self.seed, "bits", range(index, index + 1), n_ad + w)[0]
        node = g["root"]
        path = ()
        ad_out, ad_probs = [], []
        for a in range(n_ad):
            probs, kids, norms = self._adaptive_step(node, a, path)
            y = int(np.searchsorted(np.cumsum(probs), u[a], side="right"))
            y = min(y, len(probs) - 1)
            while probs[y] == 0.0:
                y = (y + 1) % len(probs)
            ad_out.append(y)
            ad_probs.append(probs[y])
            if y not in node.children:
                node.children[y] = _Node(kids[y], norms[y])
            node = node.children[y]
            path = path + (("a", y),)
        bits, probs = [], []
        for b in range(w):
            p0, _, _ = self._bit_probs(node, b, path)
            bit = 0 if u[n_ad + b] < p0 else 1
            bits.append(bit)
            probs.append(p0 if bit == 0 else 1.0 - p0)
            node = self._child(node, b, bit, path)
            path = path + (bit,)
        return SampleReport("".join(map(str, bits)), tuple(probs), g["k"], g["E"], self.seed,
                            time.perf_counter() - t_start, index, self.qubits, g["traj"],
                            tuple(ad_out), tuple(ad_probs), self._additive)

    def run(self, shots: int, start: int = 0):
        return [self.shot(i) for i in range(start, start + int(shots))]

    def counts(self, shots: int, start: int = 0) -> dict:
        out = {}
        for i in range(start, start + int(shots)):
            key = self.shot(i).bitstring
            out[key] = out.get(key, 0) + 1
        return out


def sample_exact(circuit: CircuitProgram, w=None, seed=0, shot=0, **kw) -> SampleReport:
    """One shot of the exact sampler."""
    return Sampler(circuit, "exact", w=w, seed=seed, **kw).shot(shot)


def sample_approx(circuit: CircuitProgram, w=None, delta=None, epsilon=None, p_fail=0.01,
                  seed=0, shot=0, delta_total=None, **kw) -> SampleReport:
    """One shot of the sparsified sampler."""
    return Sampler(circuit, "approx", w=w, seed=seed, delta=delta, epsilon=epsilon,
                   p_fail=p_fail, delta_total=delta_total, **kw).shot(shot)


def sample_adaptive(circuit: CircuitProgram, w=None, delta=None, epsilon=None, p_fail=0.01,
                    seed=0, shot=0, delta_total=None, **kw) -> SampleReport:
    """One shot of the sampler with measure-and-rotate branches."""
    return Sampler(circuit, "adaptive", w=w, seed=seed, delta=delta, epsilon=epsilon,
                   p_fail=p_fail, delta_total=delta_total, **kw).shot(shot)


def empirical_distribution(reports) -> dict:
    out = {}
    for r in reports:
        out[r.bitstring] = out.get(r.bitstring, 0) + 1
    total = sum(out.values())
    return {k: v / total for k, v in out.items()}
