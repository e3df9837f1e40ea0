# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled twins of the fallback kernels (see fallback.py for semantics)."""

import numpy as np
cimport numpy as cnp

cnp.import_array()

IMPLEMENTATION = "compiled"

OPTIMAL = 0
UNBOUNDED = 1
ITERATION_LIMIT = 2


def run_simplex(double[:, ::1] T, long long[::1] basis, double tol=1e-9,
                int max_iter=10000):
    cdef Py_ssize_t m = T.shape[0] - 1
    cdef Py_ssize_t ncols = T.shape[1] - 1
    cdef Py_ssize_t it, j, i, col, row
    cdef double best, ratio, pivot, factor, cutoff

    for it in range(max_iter):
        col = -1
        for j in range(ncols):
            if T[m, j] < -tol:
                col = j
                break
        if col < 0:
            return 0

        row = -1
        best = 0.0
        for i in range(m):
            if T[i, col] > tol:
                ratio = T[i, ncols] / T[i, col]
                if row < 0 or ratio < best:
                    best = ratio
                    row = i
        if row < 0:
            return 1
        cutoff = best + tol * (1.0 + (best if best >= 0 else -best))
        for i in range(m):
            if T[i, col] > tol:
                ratio = T[i, ncols] / T[i, col]
                if ratio <= cutoff and basis[i] < basis[row]:
                    row = i

        pivot = T[row, col]
        for j in range(ncols + 1):
            T[row, j] /= pivot
        for i in range(m + 1):
            if i == row:
                continue
            factor = T[i, col]
            if factor != 0.0:
                for j in range(ncols + 1):
                    T[i, j] -= factor * T[row, j]
                T[i, col] = 0.0
        T[row, col] = 1.0
        basis[row] = col
    return 2


def batch_affine_max(double[:, ::1] A, double[::1] b, double[:, ::1] X):
    cdef Py_ssize_t npieces = A.shape[0]
    cdef Py_ssize_t dim = A.shape[1]
    cdef Py_ssize_t npts = X.shape[0]
    cdef Py_ssize_t i, k, d
    cdef double v, best

    vals_arr = np.empty(npts, dtype=np.float64)
    idx_arr = np.empty(npts, dtype=np.int64)
    cdef double[::1] vals = vals_arr
    cdef long long[::1] idx = idx_arr

    for i in range(npts):
        best = -1e300
        idx[i] = 0
        for k in range(npieces):
            v = b[k]
            for d in range(dim):
                v += A[k, d] * X[i, d]
            if v > best:
                best = v
                idx[i] = k
        vals[i] = best
    return vals_arr, idx_arr
