# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops. Mirrors ``_pykernels`` function for function."""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp

cnp.import_array()

N_ALPHA = 63


def bigram_counts(names, const signed char[::1] index):
    counts = np.zeros((N_ALPHA, N_ALPHA), dtype=np.int64)
    cdef long long[:, ::1] c = counts
    cdef bytes raw
    cdef const unsigned char* p
    cdef Py_ssize_t i, length
    cdef Py_ssize_t dropped = 0
    cdef bint ok
    for name in names:
        raw = (<str>name).encode("utf-8")
        p = raw
        length = len(raw)
        ok = True
        for i in range(length):
            if index[p[i]] < 0:
                ok = False
                break
        if not ok:
            dropped += 1
            continue
        for i in range(length - 1):
            c[index[p[i]], index[p[i + 1]]] += 1
    return counts, dropped


def name_likelihoods(names, const double[:, ::1] log_prob,
                     const signed char[::1] index, double uniform):
    cdef Py_ssize_t n = len(names)
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    cdef bytes raw
    cdef const unsigned char* p
    cdef Py_ssize_t k, i, length, used
    cdef int a, b
    cdef double total
    for k in range(n):
        raw = (<str>names[k]).encode("utf-8")
        p = raw
        length = len(raw)
        total = 0.0
        used = 0
        for i in range(length - 1):
            a = index[p[i]]
            b = index[p[i + 1]]
            if a >= 0 and b >= 0:
                total += log_prob[a, b]
                used += 1
        o[k] = exp(total / used) if used > 0 else uniform
    return out


def midrank_auc(const double[::1] scores, const unsigned char[::1] positive):
    cdef Py_ssize_t n = scores.shape[0]
    # tied values are grouped below, so an unstable sort is fine
    order = np.argsort(scores)
    cdef const double[::1] s = np.asarray(scores)[order]
    cdef const unsigned char[::1] p = np.asarray(positive)[order]
    cdef Py_ssize_t i = 0, j
    cdef double n_pos = 0.0, rank_sum = 0.0, midrank
    cdef Py_ssize_t pos_in_group
    while i < n:
        j = i
        pos_in_group = 0
        while j < n and s[j] == s[i]:
            pos_in_group += p[j]
            j += 1
        # ranks i+1 .. j share the midrank
        midrank = 0.5 * (i + 1 + j)
        rank_sum += midrank * pos_in_group
        n_pos += pos_in_group
        i = j
    cdef double n_neg = n - n_pos
    return (rank_sum - n_pos * (n_pos + 1.0) / 2.0) / (n_pos * n_neg)


def ad_midrank_sum(const double[::1] pooled, const cnp.intp_t[::1] sample_id,
                   const double[::1] sizes):
    """Tie-corrected sum over samples and distinct values; ``pooled`` sorted ascending."""
    cdef Py_ssize_t n = pooled.shape[0]
    cdef Py_ssize_t k = sizes.shape[0]
    cdef double big_n = n
    below_arr = np.zeros(k, dtype=np.float64)
    equal_arr = np.zeros(k, dtype=np.float64)
    acc_arr = np.zeros(k, dtype=np.float64)
    cdef double[::1] below = below_arr
    cdef double[::1] equal = equal_arr
    cdef double[::1] acc = acc_arr
    cdef Py_ssize_t i = 0, j, s
    cdef double n_below = 0.0, l, b, denom, m, diff, total = 0.0
    while i < n:
        j = i
        for s in range(k):
            equal[s] = 0.0
        while j < n and pooled[j] == pooled[i]:
            equal[sample_id[j]] += 1.0
            j += 1
        l = j - i
        b = n_below + l / 2.0
        denom = b * (big_n - b) - big_n * l / 4.0
        if denom > 0.0:
            for s in range(k):
                m = below[s] + equal[s] / 2.0
                diff = big_n * m - sizes[s] * b
                acc[s] += l * diff * diff / denom
        for s in range(k):
            below[s] += equal[s]
        n_below += l
        i = j
    for s in range(k):
        total += acc[s] / sizes[s]
    return total
