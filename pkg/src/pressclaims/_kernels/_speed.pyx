# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled segmentation kernels; contract documented in `_pure`."""

from libc.math cimport sqrt, HUGE_VAL

import numpy as np


def seg_norm(double[:, ::1] prefix, Py_ssize_t start, Py_ssize_t stop):
    cdef Py_ssize_t d = prefix.shape[1]
    cdef Py_ssize_t c
    cdef double acc = 0.0, diff
    for c in range(d):
        diff = prefix[stop, c] - prefix[start, c]
        acc += diff * diff
    return sqrt(acc)


def best_split(double[:, ::1] prefix, Py_ssize_t start, Py_ssize_t stop, Py_ssize_t min_len):
    cdef Py_ssize_t lo = start + min_len
    cdef Py_ssize_t hi = stop - min_len
    if lo > hi:
        return -1, float("-inf")
    cdef Py_ssize_t d = prefix.shape[1]
    cdef Py_ssize_t t, c, best_t = -1
    cdef double best_v = -HUGE_VAL
    cdef double left, right, diff, v
    for t in range(lo, hi + 1):
        left = 0.0
        right = 0.0
        for c in range(d):
            diff = prefix[t, c] - prefix[start, c]
            left += diff * diff
            diff = prefix[stop, c] - prefix[t, c]
            right += diff * diff
        v = sqrt(left) + sqrt(right)
        if v > best_v:
            best_v = v
            best_t = t
    return best_t, best_v


def exact_dp(double[:, ::1] prefix, Py_ssize_t k, Py_ssize_t min_len):
    cdef Py_ssize_t n = prefix.shape[0] - 1
    if k < 1:
        raise ValueError(f"segment count must be >= 1, got {k}")
    if min_len < 1:
        raise ValueError(f"min_len must be >= 1, got {min_len}")
    if k * min_len > n:
        raise ValueError(f"cannot cut {n} items into {k} segments of >= {min_len}")

    cdef Py_ssize_t d = prefix.shape[1]
    cdef Py_ssize_t i, j, c, kk, j_lo, j_hi, arg
    cdef double acc, diff, v

    dist_arr = np.empty((n + 1, n + 1), dtype=np.float64)
    cdef double[:, ::1] dist = dist_arr
    for j in range(n + 1):
        for i in range(j, n + 1):
            acc = 0.0
            for c in range(d):
                diff = prefix[i, c] - prefix[j, c]
                acc += diff * diff
            acc = sqrt(acc)
            dist[j, i] = acc
            dist[i, j] = acc

    value_arr = np.full((k + 1, n + 1), -HUGE_VAL, dtype=np.float64)
    choice_arr = np.zeros((k + 1, n + 1), dtype=np.intp)
    cdef double[:, ::1] value = value_arr
    cdef Py_ssize_t[:, ::1] choice = choice_arr
    value[0, 0] = 0.0
    for kk in range(1, k + 1):
        j_lo = (kk - 1) * min_len
        for i in range(kk * min_len, n + 1):
            j_hi = i - min_len
            arg = j_lo
            v = -HUGE_VAL
            for j in range(j_lo, j_hi + 1):
                acc = value[kk - 1, j] + dist[j, i]
                if acc > v:
                    v = acc
                    arg = j
            value[kk, i] = v
            choice[kk, i] = arg

    bounds = []
    i = n
    for kk in range(k, 0, -1):
        i = choice[kk, i]
        bounds.append(i)
    bounds.reverse()
    return float(value[k, n]), bounds[1:]
