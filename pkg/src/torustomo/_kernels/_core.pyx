# cython: boundscheck=False, wraparound=False, cdivision=True
# distutils: language = c++
"""Compiled hot kernels: F2 boundary-matrix reduction and sign-change counts.

Contracts mirror torustomo._kernels.fallback exactly; the test suite checks
both implementations against each other.
"""

import numpy as np

cimport numpy as cnp
from libcpp.vector cimport vector

cnp.import_array()


def sign_change_counts(values):
    """Cyclic sign-change counts per row (zeros count as positive)."""
    cdef cnp.ndarray[cnp.float64_t, ndim=2, mode="c"] v = np.ascontiguousarray(values, dtype=np.float64)
    cdef Py_ssize_t rows = v.shape[0]
    cdef Py_ssize_t cols = v.shape[1]
    cdef cnp.ndarray[cnp.int32_t, ndim=1] out = np.zeros(rows, dtype=np.int32)
    cdef Py_ssize_t i, j
    cdef int count
    cdef bint prev, cur, first
    for i in range(rows):
        count = 0
        first = v[i, 0] >= 0.0
        prev = first
        for j in range(1, cols):
            cur = v[i, j] >= 0.0
            if cur != prev:
                count += 1
            prev = cur
        if prev != first:
            count += 1
        out[i] = count
    return out


cdef vector[int] _xor_merge(vector[int]& a, vector[int]& b):
    cdef vector[int] out
    cdef size_t i = 0, j = 0
    cdef int ai, bj
    out.reserve(a.size() + b.size())
    while i < a.size() and j < b.size():
        ai = a[i]
        bj = b[j]
        if ai < bj:
            out.push_back(ai)
            i += 1
        elif ai > bj:
            out.push_back(bj)
            j += 1
        else:
            i += 1
            j += 1
    while i < a.size():
        out.push_back(a[i])
        i += 1
    while j < b.size():
        out.push_back(b[j])
        j += 1
    return out


def reduce_boundary(n_cells, indptr, indices, order):
    """F2 column reduction with clearing; see the fallback for the contract."""
    cdef cnp.ndarray[cnp.int64_t, ndim=1] ptr = np.ascontiguousarray(indptr, dtype=np.int64)
    cdef cnp.ndarray[cnp.int32_t, ndim=1] idx = np.ascontiguousarray(indices, dtype=np.int32)
    cdef cnp.ndarray[cnp.int32_t, ndim=1] ord_arr = np.ascontiguousarray(order, dtype=np.int32)
    cdef int n = int(n_cells)
    cdef cnp.ndarray[cnp.int32_t, ndim=1] low = np.full(n, -1, dtype=np.int32)
    cdef cnp.ndarray[cnp.int32_t, ndim=1] owner = np.full(n, -1, dtype=np.int32)
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] cleared = np.zeros(n, dtype=np.uint8)
    cdef vector[vector[int]] stored = vector[vector[int]](n)
    cdef vector[int] col
    cdef Py_ssize_t pos, t
    cdef int c, piv, o
    cdef cnp.int64_t lo, hi

    for pos in range(ord_arr.shape[0]):
        c = ord_arr[pos]
        if cleared[c]:
            continue
        col.clear()
        lo = ptr[c]
        hi = ptr[c + 1]
        for t in range(lo, hi):
            col.push_back(idx[t])
        while col.size() > 0:
            piv = col[col.size() - 1]
            o = owner[piv]
            if o < 0:
                owner[piv] = c
                low[c] = piv
                cleared[piv] = 1
                stored[c] = col
                break
            col = _xor_merge(col, stored[o])
    return low
