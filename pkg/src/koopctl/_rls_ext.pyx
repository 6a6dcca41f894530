# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled recursive least-squares block kernel (see ``_rls_py``)."""

import numpy as np
from libc.math cimport isfinite, NAN
from scipy.linalg.cython_blas cimport dgemv


def rls_block(double[:, ::1] theta, double[:, ::1] P, const double[:, ::1] Z,
              const double[:, ::1] Y, double rho, double bound, double trip,
              lo, hi, double[:, ::1] eps, double[:, ::1] eps_a, double[::1] m2,
              rejected, Py_ssize_t start):
    cdef Py_ssize_t n = Z.shape[0], d = Z.shape[1], q = Y.shape[1]
    cdef Py_ssize_t k, i, j, c
    cdef double s, mk, a, zz
    cdef bint ok
    cdef int nd = <int>d, inc = 1
    cdef double one = 1.0, zero = 0.0
    cdef char trans = b'T'
    cdef bint project = lo is not None
    cdef const double[:, ::1] lov, hiv
    cdef unsigned char[::1] rej = rejected.view(np.uint8)
    cdef double[::1] pz = np.empty(d)
    cdef double[::1] e = np.empty(q)
    if project:
        lov = np.ascontiguousarray(np.broadcast_to(lo, (d, q)), dtype=float)
        hiv = np.ascontiguousarray(np.broadcast_to(hi, (d, q)), dtype=float)
    else:
        lov = np.zeros((1, 1))
        hiv = lov
    for k in range(start, n):
        ok = True
        for i in range(d):
            if not isfinite(Z[k, i]):
                ok = False
        for c in range(q):
            if not isfinite(Y[k, c]):
                ok = False
        if not ok:
            rej[k] = 1
            for c in range(q):
                eps[k, c] = NAN
                eps_a[k, c] = NAN
            m2[k] = NAN
            continue
        with nogil:
            mk = rho
            zz = 0.0
            # P is symmetric, so the transposed product of the row-major buffer is P z
            dgemv(&trans, &nd, &nd, &one, &P[0, 0], &nd, &Z[k, 0], &inc, &zero, &pz[0], &inc)
            for i in range(d):
                mk = mk + Z[k, i] * pz[i]
                zz = zz + Z[k, i] * Z[k, i]
            for c in range(q):
                e[c] = -Y[k, c]
            for i in range(d):
                for c in range(q):
                    e[c] = e[c] + Z[k, i] * theta[i, c]
            for i in range(d):
                for c in range(q):
                    theta[i, c] = theta[i, c] - pz[i] * e[c] / mk
            # pz[i] * pz[j] == pz[j] * pz[i] exactly, so P stays symmetric
            for i in range(d):
                for j in range(d):
                    P[i, j] = P[i, j] - pz[i] * pz[j] / mk
            if project:
                for i in range(d):
                    for c in range(q):
                        if theta[i, c] < lov[i, c]:
                            theta[i, c] = lov[i, c]
                        elif theta[i, c] > hiv[i, c]:
                            theta[i, c] = hiv[i, c]
            for c in range(q):
                eps[k, c] = e[c]
                s = -Y[k, c]
                for i in range(d):
                    s = s + Z[k, i] * theta[i, c]
                eps_a[k, c] = s
            m2[k] = mk
            bound = bound + zz / rho
        if bound >= trip:
            return k + 1, bound, True
    return n, bound, False
