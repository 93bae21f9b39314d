"""Pure numpy implementations of the hot kernels.

These are the reference versions; ``_kernels.pyx`` mirrors them line by line
and is preferred when the compiled module is importable.
"""

import numpy as np


def pfaffian(a):
    """Pfaffian of an antisymmetric matrix via pivoted Parlett-Reid reduction."""
    a = np.array(a, dtype=np.complex128, copy=True)
    n = a.shape[0]
    if n % 2:
        return 0j
    result = 1.0 + 0j
    for k in range(0, n - 1, 2):
        kp = k + 1 + int(np.argmax(np.abs(a[k + 1:, k])))
        if kp != k + 1:
            a[[k + 1, kp], :] = a[[kp, k + 1], :]
            a[:, [k + 1, kp]] = a[:, [kp, k + 1]]
            result = -result
        if a[k + 1, k] == 0:
            return 0j
        result *= a[k, k + 1]
        if k + 2 < n:
            tau = a[k, k + 2:] / a[k, k + 1]
            col = a[k + 2:, k + 1]
            a[k + 2:, k + 2:] += np.outer(tau, col) - np.outer(col, tau)
    return complex(result)


def rotate_pair(gamma, j, k, theta):
    """Return R gamma R^T for the Givens rotation of the (j, k) plane."""
    out = np.array(gamma, dtype=np.float64, copy=True)
    c, s = np.cos(theta), np.sin(theta)
    rj = out[j].copy()
    rk = out[k].copy()
    out[j] = c * rj + s * rk
    out[k] = -s * rj + c * rk
    cj = out[:, j].copy()
    ck = out[:, k].copy()
    out[:, j] = c * cj + s * ck
    out[:, k] = -s * cj + c * ck
    return out


def project_cov(gamma, q, outcome, prob):
    """Covariance after measuring qubit ``q`` with the given outcome.

    ``prob`` is the outcome probability, which must be positive.
    """
    g = np.asarray(gamma, dtype=np.float64)
    a, b = 2 * q, 2 * q + 1
    sign = 1.0 if outcome == 0 else -1.0
    ra = g[a].copy()
    rb = g[b].copy()
    out = g + (sign / (2.0 * prob)) * (np.outer(rb, ra) - np.outer(ra, rb))
    out[a, :] = 0.0
    out[b, :] = 0.0
    out[:, a] = 0.0
    out[:, b] = 0.0
    out[a, b] = sign
    out[b, a] = -sign
    return out


def basis_word(G, ref, y, ref_amp):
    """<y|psi> from the transition matrix ``G`` of psi relative to basis state ``ref``."""
    lam = 1.0
    par = 0
    idx = []
    for q in range(len(ref)):
        if ref[q] != y[q]:
            if par:
                lam = -lam
            idx.append(2 * q)
        par ^= int(y[q])
    if len(idx) % 2:
        return 0j
    if not idx:
        return complex(ref_amp)
    K = G[np.ix_(idx, idx)]
    return lam * ref_amp * pfaffian(0.5 * (K - K.T))


def overlap_kernel(Ba, Bb, Ga, Gb, refa, refb, ampa, ampb, floor):
    """Phase-sensitive <a|b> for unit-norm states with reference amplitudes.

    ``ampa``/``ampb`` are <ref|a>, <ref|b>.  Returns ``(status, value)``:
    status 0 means ``value`` is the overlap, 1 means the overlap is below
    ``floor``, 2 means no reference basis state carries enough weight.
    """
    n = Ba.shape[1]
    C = Ba.conj().T @ Bb
    mag = np.sqrt(abs(np.linalg.det(C)))
    if mag < floor:
        return 1, 0j
    G = 2.0 * (Bb @ np.linalg.solve(C, Ba.conj().T)).T
    best_w, y, ya, yb = -1.0, None, 0j, 0j
    for cand in (refa, refb):
        va = basis_word(Ga, refa, cand, ampa)
        vb = basis_word(Gb, refb, cand, ampb)
        w = abs(va) * abs(vb)
        if w > best_w:
            best_w, y, ya, yb = w, cand, va, vb
    if best_w < 1e-10:
        return 2, 0j
    gy = np.zeros((2 * n, 2 * n))
    for q in range(n):
        s = -1.0 if y[q] else 1.0
        gy[2 * q, 2 * q + 1] = s
        gy[2 * q + 1, 2 * q] = -s
    K = gy - 0.5j * (G - G.T)
    pf_y = -1.0 if sum(y) % 2 else 1.0
    ratio = pfaffian(K) * pf_y / 2.0 ** n
    val = np.conj(ya) * yb / ratio
    return 0, complex(mag * val / abs(val))


def overlap_row_kernel(Ba, Ga, refa, ampa, Bbs, Gbs, refbs, ampbs, floor):
    """``overlap_kernel(a, b_i)`` for a stack of states ``b_i``; returns (statuses, values)."""
    count = len(Bbs)
    status = np.empty(count, dtype=np.intc)
    vals = np.empty(count, dtype=np.complex128)
    for r in range(count):
        status[r], vals[r] = overlap_kernel(Ba, Bbs[r], Ga, Gbs[r], refa, refbs[r], ampa,
                                            ampbs[r], floor)
    return status, vals
