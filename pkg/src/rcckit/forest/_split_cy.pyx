# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled split search, the hot kernel of tree training.

Must stay bit-identical to _split_py: same candidate positions, the same
integer class counts, the same float expression for the score, and the same
tie-breaking (ascending feature index, then ascending threshold).
"""

from libc.math cimport INFINITY
from libc.stdlib cimport free, malloc

cimport numpy as cnp

ctypedef cnp.int64_t i64


cdef void _merge_argsort(const double* v, i64* order, i64* buf, Py_ssize_t n) noexcept nogil:
    # Bottom-up stable merge sort of order[] keyed by v[order[i]].
    cdef Py_ssize_t width = 1, lo, mid, hi, i, j, k
    cdef i64* src = order
    cdef i64* dst = buf
    cdef i64* tmp
    while width < n:
        lo = 0
        while lo < n:
            mid = lo + width
            if mid > n:
                mid = n
            hi = lo + 2 * width
            if hi > n:
                hi = n
            i = lo
            j = mid
            k = lo
            while i < mid and j < hi:
                if v[src[j]] < v[src[i]]:
                    dst[k] = src[j]
                    j += 1
                else:
                    dst[k] = src[i]
                    i += 1
                k += 1
            while i < mid:
                dst[k] = src[i]
                i += 1
                k += 1
            while j < hi:
                dst[k] = src[j]
                j += 1
                k += 1
            lo = hi
        tmp = src
        src = dst
        dst = tmp
        width *= 2
    if src != order:
        for i in range(n):
            order[i] = src[i]


def best_split(const double[:, ::1] X, const i64[::1] y, const i64[::1] idx,
               const i64[::1] feats, int n_classes, int min_leaf):
    """Best Gini split of node rows `idx` over candidate columns `feats`.

    Same contract as _split_py.best_split.
    """
    cdef Py_ssize_t n = idx.shape[0]
    cdef Py_ssize_t k = feats.shape[0]
    cdef Py_ssize_t i, jf, c
    cdef i64 f, q, r, a_sum, b_sum, b_total
    cdef double s, lo, hi, thr
    cdef double best_score = -INFINITY
    cdef double best_thr = 0.0
    cdef i64 best_feat = -1

    cdef double* vals = <double*> malloc(n * sizeof(double))
    cdef i64* lab = <i64*> malloc(n * sizeof(i64))
    cdef i64* order = <i64*> malloc(n * sizeof(i64))
    cdef i64* buf = <i64*> malloc(n * sizeof(i64))
    cdef i64* cnt_left = <i64*> malloc(n_classes * sizeof(i64))
    cdef i64* tot = <i64*> malloc(n_classes * sizeof(i64))
    if vals == NULL or lab == NULL or order == NULL or buf == NULL \
            or cnt_left == NULL or tot == NULL:
        free(vals); free(lab); free(order); free(buf); free(cnt_left); free(tot)
        raise MemoryError()

    with nogil:
        for c in range(n_classes):
            tot[c] = 0
        for i in range(n):
            lab[i] = y[idx[i]]
            tot[lab[i]] += 1
        b_total = 0
        for c in range(n_classes):
            b_total += tot[c] * tot[c]

        for jf in range(k):
            f = feats[jf]
            for i in range(n):
                vals[i] = X[idx[i], f]
                order[i] = i
            _merge_argsort(vals, order, buf, n)

            for c in range(n_classes):
                cnt_left[c] = 0
            a_sum = 0
            b_sum = b_total
            for i in range(n - 1):
                c = lab[order[i]]
                q = cnt_left[c]
                a_sum += 2 * q + 1
                cnt_left[c] = q + 1
                r = tot[c] - cnt_left[c]
                b_sum -= 2 * r + 1
                if vals[order[i]] < vals[order[i + 1]] \
                        and i + 1 >= min_leaf and n - i - 1 >= min_leaf:
                    s = <double> a_sum / <double> (i + 1) \
                        + <double> b_sum / <double> (n - i - 1)
                    if s > best_score:
                        best_score = s
                        lo = vals[order[i]]
                        hi = vals[order[i + 1]]
                        thr = lo + (hi - lo) / 2.0
                        if thr >= hi:
                            thr = lo
                        best_feat = f
                        best_thr = thr

    free(vals); free(lab); free(order); free(buf); free(cnt_left); free(tot)
    return int(best_feat), float(best_thr)
