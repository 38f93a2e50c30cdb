# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels; see ``_fallback.py`` for the reference semantics."""

import numpy as np

from libc.stdint cimport uint64_t, int64_t
from libc.stdlib cimport malloc, free

cdef uint64_t GOLDEN = 0x9E3779B97F4A7C15ULL


cdef inline uint64_t _mix64(uint64_t z) noexcept nogil:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline double _uniform(uint64_t key, uint64_t counter) noexcept nogil:
    return <double>(_mix64(key + (counter + 1) * GOLDEN) >> 11) * 1.1102230246251565e-16


def uniforms(uint64_t key, uint64_t start, Py_ssize_t count):
    cdef double[::1] out = np.empty(count, dtype=np.float64)
    cdef Py_ssize_t i
    with nogil:
        for i in range(count):
            out[i] = _uniform(key, start + i)
    return np.asarray(out)


def mc_count(double a, double b, uint64_t key, uint64_t start, uint64_t npairs):
    cdef uint64_t j, count = 0
    cdef double x, y
    with nogil:
        for j in range(start, start + npairs):
            x = a * _uniform(key, 2 * j)
            y = b * _uniform(key, 2 * j + 1)
            if y <= x:
                count += 1
    return count


def tabulate(indices, lam, int k):
    cdef const int64_t[:, ::1] idx = np.ascontiguousarray(indices, dtype=np.int64)
    cdef const double[:, ::1] pts = np.ascontiguousarray(lam, dtype=np.float64)
    cdef Py_ssize_t npts = pts.shape[0], dim = pts.shape[1], nbasis = idx.shape[0]
    values_arr = np.empty((npts, nbasis), dtype=np.float64)
    grads_arr = np.empty((npts, nbasis, dim), dtype=np.float64)
    cdef double[:, ::1] values = values_arr
    cdef double[:, :, ::1] grads = grads_arr
    cdef Py_ssize_t p, i, j, l, c
    cdef double kl, factor, prod, g
    cdef Py_ssize_t stride = k + 1
    cdef double *tab = <double *> malloc(dim * stride * sizeof(double))
    cdef double *dtab = <double *> malloc(dim * stride * sizeof(double))
    if tab == NULL or dtab == NULL:
        free(tab)
        free(dtab)
        raise MemoryError()
    try:
        with nogil:
            for p in range(npts):
                for j in range(dim):
                    kl = k * pts[p, j]
                    tab[j * stride] = 1.0
                    dtab[j * stride] = 0.0
                    for c in range(1, k + 1):
                        factor = (kl - (c - 1)) / c
                        dtab[j * stride + c] = (dtab[j * stride + c - 1] * factor
                                                + tab[j * stride + c - 1] * (<double>k / c))
                        tab[j * stride + c] = tab[j * stride + c - 1] * factor
                for i in range(nbasis):
                    prod = 1.0
                    for j in range(dim):
                        prod = prod * tab[j * stride + idx[i, j]]
                    values[p, i] = prod
                    for l in range(dim):
                        g = dtab[l * stride + idx[i, l]]
                        for j in range(dim):
                            if j != l:
                                g = g * tab[j * stride + idx[i, j]]
                        grads[p, i, l] = g
    finally:
        free(tab)
        free(dtab)
    return values_arr, grads_arr
