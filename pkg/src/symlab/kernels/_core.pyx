# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: symbol assembly + smallest singular value, Cantor function.

Mirrors ``_fallback``; selected at import by ``symlab.kernels``.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport frexp, ldexp, isfinite
from libc.stdint cimport uint64_t
from libc.stdlib cimport malloc, free
from scipy.linalg.cython_lapack cimport dgesvd, zgesvd

from ._fallback import cantor_scalar as _cantor_slow

cnp.import_array()


cdef double _sv_real(const double[:, :, ::1] coeffs, const long[:, ::1] exps,
                     const double* xi, double* mat, double* s, double* work, int lwork) nogil:
    cdef int C = coeffs.shape[0], M = coeffs.shape[1], N = coeffs.shape[2], n = exps.shape[1]
    cdef int c, i, j, p, info = 0, ldu = 1, ldvt = 1
    cdef double mono
    cdef char job = b'N'
    for i in range(M * N):
        mat[i] = 0.0
    for c in range(C):
        mono = 1.0
        for j in range(n):
            for p in range(exps[c, j]):
                mono *= xi[j]
        if mono == 0.0:
            continue
        for i in range(M):
            for j in range(N):
                mat[i + j * M] += mono * coeffs[c, i, j]
    dgesvd(&job, &job, &M, &N, mat, &M, s, NULL, &ldu, NULL, &ldvt, work, &lwork, &info)
    return s[N - 1]


cdef double _sv_complex(const double[:, :, ::1] coeffs, const long[:, ::1] exps,
                        const double* xr, const double* xim, double complex* mat, double* s,
                        double complex* work, int lwork, double* rwork) nogil:
    cdef int C = coeffs.shape[0], M = coeffs.shape[1], N = coeffs.shape[2], n = exps.shape[1]
    cdef int c, i, j, p, info = 0, ldu = 1, ldvt = 1
    cdef double complex mono, z
    cdef char job = b'N'
    for i in range(M * N):
        mat[i] = 0.0
    for c in range(C):
        mono = 1.0
        for j in range(n):
            z = xr[j] + 1j * xim[j]
            for p in range(exps[c, j]):
                mono = mono * z
        if mono == 0.0:
            continue
        for i in range(M):
            for j in range(N):
                mat[i + j * M] += mono * coeffs[c, i, j]
    zgesvd(&job, &job, &M, &N, mat, &M, s, NULL, &ldu, NULL, &ldvt, work, &lwork, rwork, &info)
    return s[N - 1]


def sigma_min_batch_real(coeffs, exps, xis):
    cdef const double[:, :, ::1] cv = np.ascontiguousarray(coeffs, dtype=np.float64)
    cdef const long[:, ::1] ev = np.ascontiguousarray(exps, dtype=np.int_)
    cdef const double[:, ::1] xv = np.ascontiguousarray(np.atleast_2d(xis), dtype=np.float64)
    cdef int S = xv.shape[0], M = cv.shape[1], N = cv.shape[2], k
    out = np.zeros(S)
    cdef double[::1] ov = out
    if M < N:
        return out
    cdef int lwork = 8 * (M + N) + 64
    cdef double* mat = <double*> malloc(M * N * sizeof(double))
    cdef double* s = <double*> malloc(N * sizeof(double))
    cdef double* work = <double*> malloc(lwork * sizeof(double))
    try:
        with nogil:
            for k in range(S):
                ov[k] = _sv_real(cv, ev, &xv[k, 0], mat, s, work, lwork)
    finally:
        free(mat)
        free(s)
        free(work)
    return out


def sigma_min_batch_complex(coeffs, exps, xr, xi):
    cdef const double[:, :, ::1] cv = np.ascontiguousarray(coeffs, dtype=np.float64)
    cdef const long[:, ::1] ev = np.ascontiguousarray(exps, dtype=np.int_)
    cdef const double[:, ::1] rv = np.ascontiguousarray(np.atleast_2d(xr), dtype=np.float64)
    cdef const double[:, ::1] iv = np.ascontiguousarray(np.atleast_2d(xi), dtype=np.float64)
    cdef int S = rv.shape[0], M = cv.shape[1], N = cv.shape[2], k
    out = np.zeros(S)
    cdef double[::1] ov = out
    if M < N:
        return out
    cdef int lwork = 8 * (M + N) + 64
    cdef double complex* mat = <double complex*> malloc(M * N * sizeof(double complex))
    cdef double* s = <double*> malloc(N * sizeof(double))
    cdef double complex* work = <double complex*> malloc(lwork * sizeof(double complex))
    cdef double* rwork = <double*> malloc(5 * N * sizeof(double) + 64)
    try:
        with nogil:
            for k in range(S):
                ov[k] = _sv_complex(cv, ev, &rv[k, 0], &iv[k, 0], mat, s, work, lwork, rwork)
    finally:
        free(mat)
        free(s)
        free(work)
        free(rwork)
    return out


def sigma_min_real(coeffs, exps, xi):
    return float(sigma_min_batch_real(coeffs, exps, np.asarray(xi, dtype=np.float64)[None, :])[0])


def sigma_min_complex(coeffs, exps, xr, xi):
    return float(sigma_min_batch_complex(
        coeffs, exps, np.asarray(xr, dtype=np.float64)[None, :], np.asarray(xi, dtype=np.float64)[None, :])[0])


cdef inline int _cantor_fast(double x, double* out) nogil:
    # exact ternary digits of the dyadic rational x = mant / 2**q; needs q <= 62
    cdef int e, q, i
    cdef double m, result = 0.0, scale = 0.5
    cdef uint64_t mant, r, d, mask
    if x <= 0.0:
        out[0] = 0.0
        return 1
    if x >= 1.0:
        out[0] = 1.0
        return 1
    m = frexp(x, &e)
    mant = <uint64_t> ldexp(m, 53)
    q = 53 - e
    while q > 0 and (mant & 1) == 0:
        mant >>= 1
        q -= 1
    if q > 62:
        return 0
    mask = ((<uint64_t> 1) << q) - 1
    r = mant
    for i in range(80):
        r *= 3
        d = r >> q
        r &= mask
        if d == 1:
            out[0] = result + scale
            return 1
        if d == 2:
            result += scale
        if r == 0:
            break
        scale *= 0.5
    out[0] = result
    return 1


def cantor_function(x):
    arr = np.asarray(x, dtype=np.float64)
    flat = np.ascontiguousarray(arr.ravel())
    cdef const double[::1] xv = flat
    out = np.empty(flat.shape[0])
    cdef double[::1] ov = out
    cdef Py_ssize_t i, n = flat.shape[0]
    cdef double v
    for i in range(n):
        v = xv[i]
        if not isfinite(v):
            raise ValueError("Cantor function of a non-finite value")
        if not _cantor_fast(v, &ov[i]):
            ov[i] = _cantor_slow(v)
    return out.reshape(arr.shape)
