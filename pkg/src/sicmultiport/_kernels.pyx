# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels: netlist propagation and purity-constraint evaluation.

Signatures and in-place semantics match ``_kernels_py``.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, cos, sin

cnp.import_array()

cdef enum:
    BS = 0
    PS = 1


def apply_elements(const signed char[::1] kinds,
                   const cnp.int64_t[::1] m1,
                   const cnp.int64_t[::1] m2,
                   const double[::1] params,
                   double complex[:, ::1] states):
    cdef Py_ssize_t nel = kinds.shape[0]
    cdef Py_ssize_t nb = states.shape[0]
    cdef Py_ssize_t e, b, i, j
    cdef double r, t
    cdef double complex a, c, ph
    for e in range(nel):
        i = m1[e]
        if kinds[e] == BS:
            j = m2[e]
            r = sqrt(params[e])
            t = sqrt(1.0 - params[e])
            for b in range(nb):
                a = states[b, i]
                c = states[b, j]
                states[b, i] = r * a + t * c
                states[b, j] = t * a - r * c
        elif kinds[e] == PS:
            ph = cos(params[e]) + 1j * sin(params[e])
            for b in range(nb):
                states[b, i] = states[b, i] * ph
        else:
            j = m2[e]
            for b in range(nb):
                a = states[b, i]
                states[b, i] = states[b, j]
                states[b, j] = a
    return np.asarray(states)


def purity_terms(const double[::1] p,
                 const cnp.int64_t[:, ::1] lines,
                 double[:, ::1] jac,
                 double[:, ::1] hess):
    cdef Py_ssize_t n = p.shape[0]
    cdef Py_ssize_t i, j, row, a, b, c
    cdef double s2 = 0.0, s3 = 0.0, lsum = 0.0, pi, pa, pb, pc
    for i in range(n):
        pi = p[i]
        s2 += pi * pi
        s3 += pi * pi * pi
        jac[0, i] = 2.0 * pi
        jac[1, i] = pi * pi
        for j in range(n):
            hess[i, j] = 0.0
        hess[i, i] = 2.0 * pi
    for row in range(lines.shape[0]):
        a = lines[row, 0]
        b = lines[row, 1]
        c = lines[row, 2]
        pa = p[a]
        pb = p[b]
        pc = p[c]
        lsum += pa * pb * pc
        jac[1, a] -= pb * pc
        jac[1, b] -= pa * pc
        jac[1, c] -= pa * pb
        hess[a, b] -= pc
        hess[b, a] -= pc
        hess[a, c] -= pb
        hess[c, a] -= pb
        hess[b, c] -= pa
        hess[c, b] -= pa
    return s2 - 1.0 / 6.0, s3 / 3.0 - lsum


def purity_residuals_batch(const double[:, ::1] P, const cnp.int64_t[:, ::1] lines):
    cdef Py_ssize_t nrow = P.shape[0]
    cdef Py_ssize_t ncol = P.shape[1]
    cdef Py_ssize_t r, i, row
    cdef double s2, s3, lsum, x
    out = np.empty((nrow, 2))
    cdef double[:, ::1] o = out
    for r in range(nrow):
        s2 = 0.0
        s3 = 0.0
        for i in range(ncol):
            x = P[r, i]
            s2 += x * x
            s3 += x * x * x
        lsum = 0.0
        for row in range(lines.shape[0]):
            lsum += P[r, lines[row, 0]] * P[r, lines[row, 1]] * P[r, lines[row, 2]]
        o[r, 0] = s2 - 1.0 / 6.0
        o[r, 1] = s3 / 3.0 - lsum
    return out
