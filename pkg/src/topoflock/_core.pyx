# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled backend for the rank-weighted alignment force.

Two entry points with identical semantics to the numpy fallback:
``accel_at_1d`` exploits a global position sort and an outward two-pointer
walk (O(n) per evaluation point after one O(n log n) sort), while
``accel_at_nd`` sorts per-point distances. Both accumulate neighbor
contributions in sorted-distance order so results do not depend on agent
labelling or outer thread scheduling.
"""

from libc.math cimport sqrt, INFINITY
from libc.stdlib cimport malloc, free, qsort

import numpy as np


cdef struct DistIdx:
    double d
    Py_ssize_t j


cdef int _cmp_distidx(const void* a, const void* b) noexcept nogil:
    cdef DistIdx* u = <DistIdx*> a
    cdef DistIdx* v = <DistIdx*> b
    if u.d < v.d:
        return -1
    if u.d > v.d:
        return 1
    if u.j < v.j:
        return -1
    if u.j > v.j:
        return 1
    return 0


cdef inline Py_ssize_t _upper_bound(const double* arr, Py_ssize_t n, double val) noexcept nogil:
    cdef Py_ssize_t lo = 0, hi = n, mid
    while lo < hi:
        mid = (lo + hi) >> 1
        if arr[mid] <= val:
            lo = mid + 1
        else:
            hi = mid
    return lo


def accel_at_1d(double[::1] x_eval, double[::1] v_eval,
                double[::1] xs, double[::1] vs,
                double[::1] ktable, double[::1] out):
    """1D alignment force at each x_eval point, sourced from sorted atoms.

    xs must be sorted ascending with vs permuted identically; ktable[k-1]
    holds the kernel at rank k/n.
    """
    cdef Py_ssize_t m = x_eval.shape[0]
    cdef Py_ssize_t n = xs.shape[0]
    cdef double inv_n = 1.0 / n
    cdef Py_ssize_t e, l, r, gl, gr, j, consumed, lo, hi, mid
    cdef double x, v, acc, dl, dr, d, coeff

    with nogil:
        for e in range(m):
            x = x_eval[e]
            v = v_eval[e]
            # first index with xs > x
            lo = 0
            hi = n
            while lo < hi:
                mid = (lo + hi) >> 1
                if xs[mid] <= x:
                    lo = mid + 1
                else:
                    hi = mid
            l = lo - 1
            r = lo
            consumed = 0
            acc = 0.0
            while consumed < n:
                dl = x - xs[l] if l >= 0 else INFINITY
                dr = xs[r] - x if r < n else INFINITY
                d = dl if dl <= dr else dr
                gl = l
                gr = r
                while l >= 0 and x - xs[l] == d:
                    l -= 1
                while r < n and xs[r] - x == d:
                    r += 1
                consumed += (gl - l) + (r - gr)
                coeff = ktable[consumed - 1] * inv_n
                for j in range(gl, l, -1):
                    acc += coeff * (vs[j] - v)
                for j in range(gr, r):
                    acc += coeff * (vs[j] - v)
            out[e] = acc
    return np.asarray(out)


def accel_at_nd(double[:, ::1] x_eval, double[:, ::1] v_eval,
                double[:, ::1] xs, double[:, ::1] vs,
                double[::1] ktable, double[:, ::1] out):
    """General-d alignment force; per-point distance sort with index ties."""
    cdef Py_ssize_t m = x_eval.shape[0]
    cdef Py_ssize_t n = xs.shape[0]
    cdef Py_ssize_t dim = xs.shape[1]
    cdef double inv_n = 1.0 / n
    cdef Py_ssize_t e, j, k, rnk, cnt
    cdef double s, diff, coeff

    cdef DistIdx* pairs = <DistIdx*> malloc(n * sizeof(DistIdx))
    cdef double* sorted_d = <double*> malloc(n * sizeof(double))
    cdef double* acc = <double*> malloc(dim * sizeof(double))
    if pairs == NULL or sorted_d == NULL or acc == NULL:
        free(pairs); free(sorted_d); free(acc)
        raise MemoryError()

    try:
        with nogil:
            for e in range(m):
                for j in range(n):
                    s = 0.0
                    for k in range(dim):
                        diff = xs[j, k] - x_eval[e, k]
                        s += diff * diff
                    pairs[j].d = sqrt(s)
                    pairs[j].j = j
                qsort(pairs, n, sizeof(DistIdx), _cmp_distidx)
                for j in range(n):
                    sorted_d[j] = pairs[j].d
                for k in range(dim):
                    acc[k] = 0.0
                for rnk in range(n):
                    j = pairs[rnk].j
                    cnt = _upper_bound(sorted_d, n, pairs[rnk].d)
                    coeff = ktable[cnt - 1] * inv_n
                    for k in range(dim):
                        acc[k] += coeff * (vs[j, k] - v_eval[e, k])
                for k in range(dim):
                    out[e, k] = acc[k]
    finally:
        free(pairs)
        free(sorted_d)
        free(acc)
    return np.asarray(out)
