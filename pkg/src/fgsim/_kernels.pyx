# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the hot kernels; same contracts as ``_kernels_py``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport cos, sin, sqrt

cnp.import_array()


cdef inline double _abs2(double complex z) nogil:
    return z.real * z.real + z.imag * z.imag


def pfaffian(a):
    """Pfaffian of an antisymmetric complex matrix (pivoted Parlett-Reid)."""
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] m = np.array(a, dtype=np.complex128, copy=True, order="C")
    cdef Py_ssize_t n = m.shape[0]
    cdef Py_ssize_t k, i, j, kp
    cdef double best, mag
    cdef double complex result = 1.0, piv, tmp, ti, tj
    cdef double complex[:, ::1] v = m
    if n % 2:
        return 0j
    for k in range(0, n - 1, 2):
        kp = k + 1
        best = _abs2(v[k + 1, k])
        for i in range(k + 2, n):
            mag = _abs2(v[i, k])
            if mag > best:
                best = mag
                kp = i
        if kp != k + 1:
            for j in range(n):
                tmp = v[k + 1, j]
                v[k + 1, j] = v[kp, j]
                v[kp, j] = tmp
            for i in range(n):
                tmp = v[i, k + 1]
                v[i, k + 1] = v[i, kp]
                v[i, kp] = tmp
            result = -result
        if v[k + 1, k] == 0:
            return 0j
        piv = v[k, k + 1]
        result *= piv
        if k + 2 < n:
            for i in range(k + 2, n):
                ti = v[k, i] / piv
                for j in range(k + 2, n):
                    tj = v[k, j] / piv
                    v[i, j] = v[i, j] + ti * v[j, k + 1] - v[i, k + 1] * tj
    return complex(result)


def rotate_pair(gamma, Py_ssize_t j, Py_ssize_t k, double theta):
    """Return R gamma R^T for the Givens rotation of the (j, k) plane."""
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.array(gamma, dtype=np.float64, copy=True, order="C")
    cdef double[:, ::1] g = out
    cdef Py_ssize_t n = g.shape[0], i
    cdef double c = cos(theta), s = sin(theta), a, b
    for i in range(n):
        a = g[j, i]
        b = g[k, i]
        g[j, i] = c * a + s * b
        g[k, i] = -s * a + c * b
    for i in range(n):
        a = g[i, j]
        b = g[i, k]
        g[i, j] = c * a + s * b
        g[i, k] = -s * a + c * b
    return out


def project_cov(gamma, Py_ssize_t q, int outcome, double prob):
    """Covariance after measuring qubit ``q``; ``prob`` is the outcome probability."""
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.array(gamma, dtype=np.float64, copy=True, order="C")
    cdef double[:, ::1] g = out
    cdef Py_ssize_t n = g.shape[0], i, j
    cdef Py_ssize_t a = 2 * q, b = 2 * q + 1
    cdef double sign = 1.0 if outcome == 0 else -1.0
    cdef double f = sign / (2.0 * prob)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] ra_arr = out[a].copy()
    cdef cnp.ndarray[cnp.float64_t, ndim=1] rb_arr = out[b].copy()
    cdef double[::1] ra = ra_arr
    cdef double[::1] rb = rb_arr
    for i in range(n):
        for j in range(n):
            g[i, j] += f * (rb[i] * ra[j] - ra[i] * rb[j])
    for i in range(n):
        g[a, i] = 0.0
        g[b, i] = 0.0
        g[i, a] = 0.0
        g[i, b] = 0.0
    g[a, b] = sign
    g[b, a] = -sign
    return out


cdef double complex _pf_inplace(double complex[:, ::1] v, Py_ssize_t n):
    cdef Py_ssize_t k, i, j, kp
    cdef double best, mag
    cdef double complex result = 1.0, piv, tmp, ti, tj
    if n % 2:
        return 0j
    for k in range(0, n - 1, 2):
        kp = k + 1
        best = _abs2(v[k + 1, k])
        for i in range(k + 2, n):
            mag = _abs2(v[i, k])
            if mag > best:
                best = mag
                kp = i
        if kp != k + 1:
            for j in range(n):
                tmp = v[k + 1, j]
                v[k + 1, j] = v[kp, j]
                v[kp, j] = tmp
            for i in range(n):
                tmp = v[i, k + 1]
                v[i, k + 1] = v[i, kp]
                v[i, kp] = tmp
            result = -result
        if v[k + 1, k] == 0:
            return 0j
        piv = v[k, k + 1]
        result *= piv
        for i in range(k + 2, n):
            ti = v[k, i] / piv
            for j in range(k + 2, n):
                tj = v[k, j] / piv
                v[i, j] = v[i, j] + ti * v[j, k + 1] - v[i, k + 1] * tj
    return result


cdef double complex _basis_word(double complex[:, ::1] G, long[::1] ref, long[::1] y,
                                double complex ref_amp, double complex[:, ::1] work):
    cdef Py_ssize_t q, i, j, m = 0, n = ref.shape[0]
    cdef double lam = 1.0
    cdef int par = 0
    cdef Py_ssize_t idx[128]
    for q in range(n):
        if ref[q] != y[q]:
            if par:
                lam = -lam
            idx[m] = 2 * q
            m += 1
        par ^= <int>y[q]
    if m % 2:
        return 0j
    if m == 0:
        return ref_amp
    for i in range(m):
        for j in range(m):
            work[i, j] = 0.5 * (G[idx[i], idx[j]] - G[idx[j], idx[i]])
    return lam * ref_amp * _pf_inplace(work, m)


def basis_word(G, ref, y, ref_amp):
    """<y|psi> from the transition matrix ``G`` of psi relative to basis state ``ref``."""
    cdef double complex[:, ::1] g = np.ascontiguousarray(G, dtype=np.complex128)
    cdef long[::1] r = np.ascontiguousarray(ref, dtype=np.int_)
    cdef long[::1] yy = np.ascontiguousarray(y, dtype=np.int_)
    work = np.empty((r.shape[0], r.shape[0]), dtype=np.complex128)
    return complex(_basis_word(g, r, yy, ref_amp, work))


cdef int _overlap_core(double complex[:, ::1] Ba, double complex[:, ::1] Bb,
                       double complex[:, ::1] Ga, double complex[:, ::1] Gb,
                       long[::1] refa, long[::1] refb, double complex ampa,
                       double complex ampb, double floor, double complex[:, ::1] lu,
                       double complex[:, ::1] X, double complex[:, ::1] G,
                       double complex[:, ::1] work, double complex* out):
    cdef Py_ssize_t n = Ba.shape[1], m = Ba.shape[0]
    cdef Py_ssize_t i, j, k, p, c
    cdef double complex acc, piv, tmp, det = 1.0, va, vb, ya = 0, yb = 0, ratio, val
    cdef double best, mag, w, best_w = -1.0, pf_y
    cdef int parity
    cdef long[::1] y = refa
    out[0] = 0j
    # C = Ba^H Bb
    for i in range(n):
        for j in range(n):
            acc = 0
            for k in range(m):
                acc = acc + Ba[k, i].conjugate() * Bb[k, j]
            lu[i, j] = acc
    # right-hand sides Ba^H
    for i in range(n):
        for j in range(m):
            X[i, j] = Ba[j, i].conjugate()
    # LU with partial pivoting, applied to X on the fly
    for k in range(n):
        p = k
        best = _abs2(lu[k, k])
        for i in range(k + 1, n):
            mag = _abs2(lu[i, k])
            if mag > best:
                best = mag
                p = i
        if best == 0.0:
            return 1
        if p != k:
            det = -det
            for j in range(n):
                tmp = lu[k, j]
                lu[k, j] = lu[p, j]
                lu[p, j] = tmp
            for j in range(m):
                tmp = X[k, j]
                X[k, j] = X[p, j]
                X[p, j] = tmp
        piv = lu[k, k]
        det = det * piv
        for i in range(k + 1, n):
            acc = lu[i, k] / piv
            if acc != 0:
                for j in range(k + 1, n):
                    lu[i, j] = lu[i, j] - acc * lu[k, j]
                for j in range(m):
                    X[i, j] = X[i, j] - acc * X[k, j]
    if sqrt(abs(det)) < floor:
        return 1
    mag = sqrt(abs(det))
    # back substitution: X <- C^{-1} Ba^H
    for k in range(n - 1, -1, -1):
        for j in range(m):
            acc = X[k, j]
            for c in range(k + 1, n):
                acc = acc - lu[k, c] * X[c, j]
            X[k, j] = acc / lu[k, k]
    # G = 2 (Bb X)^T
    for i in range(m):
        for j in range(m):
            acc = 0
            for k in range(n):
                acc = acc + Bb[i, k] * X[k, j]
            G[j, i] = 2.0 * acc
    for c in range(2):
        if c == 0:
            va = ampa
            vb = _basis_word(Gb, refb, refa, ampb, work)
        else:
            va = _basis_word(Ga, refa, refb, ampa, work)
            vb = ampb
        w = abs(va) * abs(vb)
        if w > best_w:
            best_w = w
            ya = va
            yb = vb
            y = refa if c == 0 else refb
    if best_w < 1e-10:
        return 2
    parity = 0
    for i in range(m):
        for j in range(m):
            work[i, j] = -0.5j * (G[i, j] - G[j, i])
    for k in range(n):
        pf_y = -1.0 if y[k] else 1.0
        work[2 * k, 2 * k + 1] = work[2 * k, 2 * k + 1] + pf_y
        work[2 * k + 1, 2 * k] = work[2 * k + 1, 2 * k] - pf_y
        parity ^= <int>y[k]
    ratio = _pf_inplace(work, m) * (-1.0 if parity else 1.0)
    for k in range(n):
        ratio = ratio * 0.5
    val = ya.conjugate() * yb / ratio
    out[0] = mag * val / abs(val)
    return 0


def overlap_kernel(Ba_, Bb_, Ga_, Gb_, refa_, refb_, double complex ampa,
                   double complex ampb, double floor):
    """Phase-sensitive <a|b> for unit-norm states with reference amplitudes.

    ``ampa``/``ampb`` are <ref|a>, <ref|b>.  Returns ``(status, value)``:
    status 0 means ``value`` is the overlap, 1 means the overlap is below
    ``floor``, 2 means no reference basis state carries enough weight.
    """
    cdef double complex[:, ::1] Ba = np.ascontiguousarray(Ba_, dtype=np.complex128)
    cdef Py_ssize_t n = Ba.shape[1], m = Ba.shape[0]
    cdef double complex val
    cdef int status
    if m > 256:
        raise ValueError("system too large for the compiled overlap kernel")
    status = _overlap_core(
        Ba, np.ascontiguousarray(Bb_, dtype=np.complex128),
        np.ascontiguousarray(Ga_, dtype=np.complex128),
        np.ascontiguousarray(Gb_, dtype=np.complex128),
        np.ascontiguousarray(refa_, dtype=np.int_), np.ascontiguousarray(refb_, dtype=np.int_),
        ampa, ampb, floor, np.empty((n, n), dtype=np.complex128),
        np.empty((n, m), dtype=np.complex128), np.empty((m, m), dtype=np.complex128),
        np.empty((m, m), dtype=np.complex128), &val)
    return status, complex(val)


def overlap_row_kernel(Ba_, Ga_, refa_, double complex ampa, Bbs_, Gbs_, refbs_, ampbs_,
                       double floor):
    """``overlap_kernel(a, b_i)`` for a stack of states ``b_i``; returns (statuses, values)."""
    cdef double complex[:, ::1] Ba = np.ascontiguousarray(Ba_, dtype=np.complex128)
    cdef double complex[:, ::1] Ga = np.ascontiguousarray(Ga_, dtype=np.complex128)
    cdef long[::1] refa = np.ascontiguousarray(refa_, dtype=np.int_)
    cdef double complex[:, :, ::1] Bbs = np.ascontiguousarray(Bbs_, dtype=np.complex128)
    cdef double complex[:, :, ::1] Gbs = np.ascontiguousarray(Gbs_, dtype=np.complex128)
    cdef long[:, ::1] refbs = np.ascontiguousarray(refbs_, dtype=np.int_)
    cdef double complex[::1] ampbs = np.ascontiguousarray(ampbs_, dtype=np.complex128)
    cdef Py_ssize_t n = Ba.shape[1], m = Ba.shape[0], count = Bbs.shape[0], r
    if m > 256:
        raise ValueError("system too large for the compiled overlap kernel")
    status_arr = np.empty(count, dtype=np.intc)
    vals_arr = np.empty(count, dtype=np.complex128)
    cdef int[::1] status = status_arr
    cdef double complex[::1] vals = vals_arr
    cdef double complex[:, ::1] lu = np.empty((n, n), dtype=np.complex128)
    cdef double complex[:, ::1] X = np.empty((n, m), dtype=np.complex128)
    cdef double complex[:, ::1] G = np.empty((m, m), dtype=np.complex128)
    cdef double complex[:, ::1] work = np.empty((m, m), dtype=np.complex128)
    for r in range(count):
        status[r] = _overlap_core(Ba, Bbs[r], Ga, Gbs[r], refa, refbs[r], ampa, ampbs[r],
                                  floor, lu, X, G, work, &vals[r])
    return status_arr, vals_arr
