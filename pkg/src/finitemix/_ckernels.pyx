# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled mixing kernels. Same contracts as ``_pykernels``."""

import numpy as np
cimport numpy as cnp

cnp.import_array()


def csr_mix(const cnp.int64_t[::1] indptr,
            const cnp.int64_t[::1] indices,
            const double[::1] data,
            const double[:, ::1] y):
    cdef Py_ssize_t n = indptr.shape[0] - 1
    cdef Py_ssize_t d = y.shape[1]
    out_arr = np.zeros((n, d), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t i, p, j, c
    cdef double w
    with nogil:
        for i in range(n):
            for p in range(indptr[i], indptr[i + 1]):
                j = indices[p]
                w = data[p]
                for c in range(d):
                    out[i, c] += w * y[j, c]
    return out_arr


def consensus_error(const double[:, ::1] y):
    cdef Py_ssize_t n = y.shape[0]
    cdef Py_ssize_t d = y.shape[1]
    if n == 0:
        return 0.0
    mean_arr = np.zeros(d, dtype=np.float64)
    cdef double[::1] mean = mean_arr
    cdef Py_ssize_t i, c
    cdef double acc = 0.0, diff
    with nogil:
        for i in range(n):
            for c in range(d):
                mean[c] += y[i, c]
        for c in range(d):
            mean[c] /= n
        for i in range(n):
            for c in range(d):
                diff = y[i, c] - mean[c]
                acc += diff * diff
    return acc / n
