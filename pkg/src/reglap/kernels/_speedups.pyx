# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled hot kernels: exact cut-norm enumeration and Jacobi rotations."""

import numpy as np

cimport cython
from libc.math cimport fabs, sqrt


def inf_to_one_exact(double[:, ::1] B):
    """Exact ell_inf -> ell_1 norm of B, enumerating sign vectors on the rows.

    Walks a Gray code over half the sign cube (global sign flip leaves the
    value unchanged), updating z = B^T x incrementally in O(k) per step.
    The caller is responsible for orienting B so that the row count is the
    smaller dimension.
    """
    cdef Py_ssize_t m = B.shape[0]
    cdef Py_ssize_t k = B.shape[1]
    if m == 0 or k == 0:
        return 0.0
    if m > 25:
        raise ValueError("enumeration limited to 25 rows")

    cdef double[::1] z = np.asarray(B).sum(axis=0)
    cdef signed char[::1] sign = np.ones(m, dtype=np.int8)
    cdef unsigned long long steps = 1ULL << (m - 1) if m > 1 else 1
    cdef unsigned long long c
    cdef Py_ssize_t i, j
    cdef double best = 0.0, acc, s2

    acc = 0.0
    for j in range(k):
        acc += fabs(z[j])
    best = acc

    for c in range(1, steps):
        # index of the bit that flips at Gray-code step c
        i = 0
        while not (c >> i) & 1:
            i += 1
        s2 = -2.0 * sign[i]
        sign[i] = -sign[i]
        acc = 0.0
        for j in range(k):
            z[j] += s2 * B[i, j]
            acc += fabs(z[j])
        if acc > best:
            best = acc
    return best


def jacobi_sweeps(double[:, ::1] S, double[:, ::1] V, double tol, int max_sweeps):
    """Cyclic Jacobi rotations on symmetric S, in place.

    V accumulates the rotations (pass identity for eigenvectors).  Returns
    the number of completed sweeps, or -1 if the off-diagonal mass did not
    drop below tol * ||S||_F.
    """
    cdef Py_ssize_t n = S.shape[0]
    cdef Py_ssize_t p, q, r
    cdef int sweep
    cdef double off, fro, app, aqq, apq, theta, t, c, s, srp, srq

    fro = 0.0
    for p in range(n):
        for q in range(n):
            fro += S[p, q] * S[p, q]
    fro = sqrt(fro)
    if fro == 0.0:
        return 0

    for sweep in range(max_sweeps):
        off = 0.0
        for p in range(n - 1):
            for q in range(p + 1, n):
                off += S[p, q] * S[p, q]
        if sqrt(2.0 * off) <= tol * fro:
            return sweep
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = S[p, q]
                if fabs(apq) <= 1e-300:
                    continue
                app = S[p, p]
                aqq = S[q, q]
                theta = (aqq - app) / (2.0 * apq)
                if theta >= 0:
                    t = 1.0 / (theta + sqrt(1.0 + theta * theta))
                else:
                    t = -1.0 / (-theta + sqrt(1.0 + theta * theta))
                c = 1.0 / sqrt(1.0 + t * t)
                s = t * c
                for r in range(n):
                    srp = S[r, p]
                    srq = S[r, q]
                    S[r, p] = c * srp - s * srq
                    S[r, q] = s * srp + c * srq
                for r in range(n):
                    srp = S[p, r]
                    srq = S[q, r]
                    S[p, r] = c * srp - s * srq
                    S[q, r] = s * srp + c * srq
                for r in range(n):
                    srp = V[r, p]
                    srq = V[r, q]
                    V[r, p] = c * srp - s * srq
                    V[r, q] = s * srp + c * srq
    off = 0.0
    for p in range(n - 1):
        for q in range(p + 1, n):
            off += S[p, q] * S[p, q]
    if sqrt(2.0 * off) <= tol * fro:
        return max_sweeps
    return -1
