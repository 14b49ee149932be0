# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels. Same contracts as ``_pykernels``."""

import numpy as np
from libc.math cimport sqrt, isnan, fabs
from libc.stdlib cimport calloc, free


def sieve_segment(long long lo, long long hi, const long long[::1] base):
    cdef Py_ssize_t n = hi - lo + 1
    out = np.ones(n, dtype=np.uint8)
    cdef unsigned char[::1] f = out
    cdef long long p, start, j
    cdef Py_ssize_t i
    with nogil:
        for i in range(base.shape[0]):
            p = base[i]
            if p * p > hi:
                break
            start = ((lo + p - 1) // p) * p
            if start < p * p:
                start = p * p
            j = start - lo
            while j < n:
                f[j] = 0
                j += p
        j = 0
        while j < n and lo + j < 2:
            f[j] = 0
            j += 1
    return out


def prefix_char_scan(const long long[::1] residues, const double[::1] weights,
                     const int[:, ::1] table_t, const double[::1] cos_t, const double[::1] sin_t):
    cdef Py_ssize_t n = residues.shape[0]
    cdef Py_ssize_t nchar = table_t.shape[1]
    re_out = np.zeros(nchar)
    im_out = np.zeros(nchar)
    best_out = np.zeros(nchar)
    arg_out = np.full(nchar, -1, dtype=np.int64)
    comp_re_a = np.zeros(nchar)
    comp_im_a = np.zeros(nchar)
    cdef double[::1] sr = re_out
    cdef double[::1] si = im_out
    cdef double[::1] cr = comp_re_a
    cdef double[::1] ci = comp_im_a
    cdef double[::1] best = best_out
    cdef long long[::1] arg = arg_out
    cdef Py_ssize_t i, c
    cdef int k
    cdef double w, term, t, pr, pi, mag
    with nogil:
        # n-major, character-minor: one pass over the terms feeds every accumulator.
        for i in range(n):
            w = weights[i]
            for c in range(nchar):
                k = table_t[residues[i], c]
                if k < 0:
                    continue
                # Neumaier compensated summation, real and imaginary parts.
                term = w * cos_t[k]
                t = sr[c] + term
                if fabs(sr[c]) >= fabs(term):
                    cr[c] += (sr[c] - t) + term
                else:
                    cr[c] += (term - t) + sr[c]
                sr[c] = t
                term = w * sin_t[k]
                t = si[c] + term
                if fabs(si[c]) >= fabs(term):
                    ci[c] += (si[c] - t) + term
                else:
                    ci[c] += (term - t) + si[c]
                si[c] = t
                pr = sr[c] + cr[c]
                pi = si[c] + ci[c]
                mag = pr * pr + pi * pi
                if mag > best[c]:
                    best[c] = mag
                    arg[c] = i
        for c in range(nchar):
            sr[c] = sr[c] + cr[c]
            si[c] = si[c] + ci[c]
            best[c] = sqrt(best[c])
    return re_out, im_out, best_out, arg_out


def pair_histograms(const int[:, ::1] table, Py_ssize_t l, int order):
    cdef Py_ssize_t nchar = table.shape[0]
    cdef Py_ssize_t nunits = table.shape[1]
    out = np.zeros((nunits, order), dtype=np.int64)
    cdef long long[:, ::1] h = out
    cdef Py_ssize_t c, m
    cdef int tl, k
    with nogil:
        for c in range(nchar):
            tl = table[c, l]
            for m in range(nunits):
                k = table[c, m] - tl
                if k < 0:
                    k += order
                h[m, k] += 1
    return out


def bv_scan(const long long[::1] residues, const long long[::1] unit_index, Py_ssize_t n_units,
            const double[::1] li_at, const double[::1] li_before, double li_end, long long phi):
    cdef Py_ssize_t n = residues.shape[0]
    if n == 0:
        return 0.0
    cdef long long *counts = <long long *> calloc(n_units, sizeof(long long))
    # freq[v] = number of unit classes currently holding exactly v primes
    cdef long long *freq = <long long *> calloc(n + 2, sizeof(long long))
    if counts == NULL or freq == NULL:
        free(counts)
        free(freq)
        raise MemoryError()
    cdef long long hi = 0, lo = 0, u, v
    cdef double out = 0.0, dens, dev
    cdef Py_ssize_t i
    with nogil:
        freq[0] = n_units
        for i in range(n):
            dens = li_before[i]
            if not isnan(dens):
                dens = dens / phi
                dev = hi - dens
                if dens - lo > dev:
                    dev = dens - lo
                if dev > out:
                    out = dev
            u = unit_index[residues[i]]
            if u >= 0:
                v = counts[u]
                counts[u] = v + 1
                freq[v] -= 1
                freq[v + 1] += 1
                if v + 1 > hi:
                    hi = v + 1
                if v == lo and freq[v] == 0:
                    lo = v + 1
            dens = li_at[i] / phi
            dev = hi - dens
            if dens - lo > dev:
                dev = dens - lo
            if dev > out:
                out = dev
        dens = li_end / phi
        dev = hi - dens
        if dens - lo > dev:
            dev = dens - lo
        if dev > out:
            out = dev
    free(counts)
    free(freq)
    return out
