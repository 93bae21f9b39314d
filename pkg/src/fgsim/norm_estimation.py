"""Squared norms of Gaussian superpositions: exact pairwise sums and a sampled estimator.

The sampled estimator draws a term ``a`` with probability ``|c_a| / ||c||_1`` and
returns ``||c||_1 * Re[conj(c_a)/|c_a| * <g_a|Psi>]``, whose mean is ``<Psi|Psi>``.
Batch means are combined by a median.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgument, InvalidState
from .gaussian_core import OverlapRows
from .rng import keyed_rng

#: below this squared norm the multiplicative guarantee is replaced by an additive one
NORM_FLOOR = 1e-6
#: pilot draws used to size the batches
PILOT_DRAWS = 64
#: medians per unit of log(1/p_fail)
MEDIANS_PER_LOG = 8


@dataclass(frozen=True)
class NormEstimate:
    value: float
    epsilon: float
    p_fail: float
    samples_used: int
    additive: bool = False
    overlaps_used: int = 0


def merged_terms(sup):
    """Terms with identical state objects combined; zero-amplitude states dropped."""
    acc = {}
    order = []
    for c, s in sup.terms:
        if s.annihilated or c == 0:
            continue
        key = id(s)
        if key in acc:
            acc[key][0] += c
        else:
            acc[key] = [c, s]
            order.append(key)
    return [(acc[k][0], acc[k][1]) for k in order if acc[k][0] != 0]


def gram_matrix(states) -> np.ndarray:
    """Hermitian matrix of pairwise overlaps."""
    rows = OverlapRows(states)
    M = np.array([rows.row(s) for s in states]).reshape(len(states), len(states))
    M = np.triu(M, 1)
    M = M + M.conj().T
    M[np.diag_indices_from(M)] = [s.norm ** 2 for s in states]
    return M


def exact_norm(sup) -> float:
    """``sum_ab conj(c_a) c_b <g_a|g_b>`` (the squared norm)."""
    terms = merged_terms(sup)
    if not terms:
        return 0.0
    c = np.array([t[0] for t in terms])
    M = gram_matrix([t[1] for t in terms])
    val = np.vdot(c, M @ c)
    scale = max(1.0, float(np.sum(np.abs(c) * np.array([t[1].norm for t in terms]))) ** 2)
    if abs(val.imag) > 1e-9 * scale:
        raise InvalidState(f"squared norm has imaginary part {val.imag:.3e}")
    return max(0.0, float(val.real))


def _check(epsilon, p_fail):
    epsilon, p_fail = float(epsilon), float(p_fail)
    if not 0.0 < epsilon < 1.0:
        raise InvalidArgument(f"epsilon must lie in (0, 1), got {epsilon}")
    if not 0.0 < p_fail < 1.0:
        raise InvalidArgument(f"p_fail must lie in (0, 1), got {p_fail}")
    return epsilon, p_fail


class _Amplitudes:
    """Lazily computed ``<g_a|Psi>`` for the merged terms."""

    def __init__(self, terms):
        self.terms = terms
        self.coeffs = np.array([t[0] for t in terms], dtype=np.complex128)
        self.states = [t[1] for t in terms]
        self.rows = OverlapRows(self.states)
        self.cache = {}
        self.overlaps = 0

    def __call__(self, a):
        if a not in self.cache:
            row = self.rows.row(self.states[a])
            self.cache[a] = complex(row @ self.coeffs)
            self.overlaps += len(self.terms)
        return self.cache[a]


def _setup(sup):
    terms = merged_terms(sup)
    c = np.array([t[0] for t in terms], dtype=np.complex128)
    mags = np.abs(c)
    return terms, c, mags, float(mags.sum())


def _y_values(idx, amps, c, mags, l1):
    return {a: l1 * (np.conj(c[a]) / mags[a] * amps(a)).real for a in idx}


def norm_samples(sup, size: int, seed) -> np.ndarray:
    """Raw single-draw estimates; their mean is the squared norm."""
    terms, c, mags, l1 = _setup(sup)
    if not terms:
        return np.zeros(int(size))
    amps = _Amplitudes(terms)
    draws = keyed_rng(seed, "norm_samples").choice(len(terms), size=int(size), p=mags / l1)
    y = _y_values(np.unique(draws), amps, c, mags, l1)
    return np.array([y[a] for a in draws])


def batch_plan(variance_proxy, norm_lower, epsilon, p_fail):
    """(batch size, number of batches) for the median of means.

    Chebyshev puts each batch mean inside ``(1 +- epsilon)`` with probability at
    least 3/4; a Hoeffding bound on the median then needs ``8 ln(1/p_fail)`` batches.
    """
    batch = max(1, int(math.ceil(4.0 * variance_proxy / (epsilon ** 2 * norm_lower ** 2))))
    medians = max(1, int(math.ceil(MEDIANS_PER_LOG * math.log(1.0 / p_fail))))
    if medians % 2 == 0:
        medians += 1
    return batch, medians


def fast_norm(sup, epsilon, p_fail, seed, floor: float = NORM_FLOOR,
              max_samples: int = 10 ** 9) -> NormEstimate:
    """Median-of-means estimate of the squared norm within ``(1 +- epsilon)``.

    Batches are sized from a pilot: the variance proxy is ``||c||_1^2`` times the
    largest ``|<g_a|Psi>|^2`` seen, and the norm lower bound is half the pilot
    mean (never below ``floor``).  If the pilot mean is below ``floor`` the
    estimate is flagged additive.
    """
    epsilon, p_fail = _check(epsilon, p_fail)
    terms, c, mags, l1 = _setup(sup)
    if not terms:
        return NormEstimate(0.0, epsilon, p_fail, 0, True, 0)
    probs = mags / l1
    amps = _Amplitudes(terms)
    if len(terms) == 1:
        y = _y_values([0], amps, c, mags, l1)[0]
        return NormEstimate(max(0.0, y), epsilon, p_fail, 1, False, amps.overlaps)
    rng = keyed_rng(seed, "fast_norm")
    pilot = rng.multinomial(PILOT_DRAWS, probs)
    seen = np.nonzero(pilot)[0]
    y = _y_values(seen, amps, c, mags, l1)
    pilot_mean = sum(pilot[a] * y[a] for a in seen) / PILOT_DRAWS
    vproxy = l1 ** 2 * max(abs(amps(a)) ** 2 for a in seen)
    additive = pilot_mean < floor
    lower = max(floor, 0.5 * pilot_mean)
    batch, medians = batch_plan(vproxy, lower, epsilon, p_fail)
    if batch * medians > max_samples:
        batch = max(1, max_samples // medians)
        additive = True
    counts = rng.multinomial(batch, probs, size=medians)
    used = np.nonzero(counts.sum(axis=0))[0]
    y.update(_y_values([a for a in used if a not in y], amps, c, mags, l1))
    yvec = np.array([y.get(a, 0.0) for a in range(len(terms))])
    means = counts @ yvec / batch
    value = max(0.0, float(np.median(means)))
    return NormEstimate(value, epsilon, p_fail, int(batch * medians + PILOT_DRAWS), additive,
                        amps.overlaps)
