# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the hot loops; see ``_pykernels`` for semantics."""

import numpy as np
cimport numpy as cnp

cnp.import_array()


def ecdf_gap(const double[::1] x1, const double[::1] f1,
             const double[::1] x2, const double[::1] f2,
             double lo, double hi):
    cdef Py_ssize_t n1 = x1.shape[0], n2 = x2.shape[0]
    cdef Py_ssize_t i = 0, j = 0
    cdef double v1 = 0.0, v2 = 0.0, ks = 0.0, area = 0.0
    cdef double prev = lo, x, left, right, d
    while i < n1 or j < n2:
        if j >= n2 or (i < n1 and x1[i] < x2[j]):
            x = x1[i]
        else:
            x = x2[j]
        if x > prev:
            left = prev if prev > lo else lo
            right = x if x < hi else hi
            if right > left:
                area += abs(v1 - v2) * (right - left)
            prev = x
        while i < n1 and x1[i] == x:
            v1 = f1[i]
            i += 1
        while j < n2 and x2[j] == x:
            v2 = f2[j]
            j += 1
        d = abs(v1 - v2)
        if d > ks:
            ks = d
    if hi > prev:
        left = prev if prev > lo else lo
        area += abs(v1 - v2) * (hi - left)
    return ks, area


def fluid_queue(const cnp.int64_t[::1] arrivals, const cnp.int64_t[::1] capacity,
                cnp.int64_t buffer0, cnp.int64_t buffer_cap):
    cdef Py_ssize_t n = arrivals.shape[0], t
    served_a = np.zeros(n, dtype=np.int64)
    buffer_a = np.zeros(n, dtype=np.int64)
    dropped_a = np.zeros(n, dtype=np.int64)
    cdef cnp.int64_t[::1] served = served_a
    cdef cnp.int64_t[::1] buffer = buffer_a
    cdef cnp.int64_t[::1] dropped = dropped_a
    cdef cnp.int64_t b = buffer0, avail, s, d
    for t in range(n):
        avail = b + arrivals[t]
        s = capacity[t] if capacity[t] < avail else avail
        b = avail - s
        d = 0
        if buffer_cap >= 0 and b > buffer_cap:
            d = b - buffer_cap
            b = buffer_cap
        served[t] = s
        buffer[t] = b
        dropped[t] = d
    return served_a, buffer_a, dropped_a
