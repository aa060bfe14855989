# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled population kernels.

Every function takes a whole population of flat genomes, shape ``(N, L)`` with
``L = c_max * (1 + D)``: ``c_max`` mask genes followed by ``c_max`` centroid
blocks of length ``D``. Semantics must stay identical to ``_kernels_py``.
"""
import numpy as np

from libc.math cimport sqrt, INFINITY

cdef double SEP_PENALTY = 1e12


cdef inline Py_ssize_t _nearest(const double[:, ::1] G, Py_ssize_t n,
                                const double[:, ::1] X, Py_ssize_t s,
                                const Py_ssize_t* active, Py_ssize_t n_active,
                                Py_ssize_t c_max, Py_ssize_t D,
                                double* best_d2) noexcept nogil:
    cdef Py_ssize_t a, c, d, off, best = -1
    cdef double acc, diff, best_v = INFINITY
    for a in range(n_active):
        c = active[a]
        off = c_max + c * D
        acc = 0.0
        for d in range(D):
            diff = X[s, d] - G[n, off + d]
            acc += diff * diff
        # strict comparison: ties go to the lowest centroid index
        if acc < best_v:
            best_v = acc
            best = c
    best_d2[0] = best_v
    return best


cdef inline Py_ssize_t _active_set(const double[:, ::1] G, Py_ssize_t n,
                                   Py_ssize_t c_max, Py_ssize_t* out) noexcept nogil:
    cdef Py_ssize_t c, k = 0
    for c in range(c_max):
        if G[n, c] >= 0.5:
            out[k] = c
            k += 1
    return k


def assign(const double[:, ::1] genomes, const double[:, ::1] X, Py_ssize_t c_max):
    """Nearest active centroid per sample; returns ``(labels, distances)``."""
    cdef Py_ssize_t N = genomes.shape[0], S = X.shape[0], D = X.shape[1]
    labels_arr = np.full((N, S), -1, dtype=np.int64)
    dist_arr = np.full((N, S), np.inf, dtype=np.float64)
    cdef long long[:, ::1] labels = labels_arr
    cdef double[:, ::1] dist = dist_arr
    cdef Py_ssize_t[::1] active = np.empty(c_max, dtype=np.intp)
    cdef Py_ssize_t n, s, k, best
    cdef double d2
    with nogil:
        for n in range(N):
            k = _active_set(genomes, n, c_max, &active[0])
            if k == 0:
                continue
            for s in range(S):
                best = _nearest(genomes, n, X, s, &active[0], k, c_max, D, &d2)
                labels[n, s] = best
                dist[n, s] = sqrt(d2)
    return labels_arr, dist_arr


def encode(const double[:, ::1] genomes, const double[:, ::1] X_assign,
           const double[:, ::1] X_mean, Py_ssize_t c_max,
           const double[::1] lo, const double[::1] hi):
    """Assign on ``X_assign`` then move active centroids to the means of ``X_mean``.

    Rows of the two matrices are the same samples. Active centroids with no
    assigned sample are deactivated (mask 0.0).
    """
    cdef Py_ssize_t N = genomes.shape[0], S = X_assign.shape[0], D = X_assign.shape[1]
    out_arr = np.array(genomes, dtype=np.float64, copy=True)
    cdef double[:, ::1] out = out_arr
    cdef double[:, ::1] sums = np.zeros((c_max, D), dtype=np.float64)
    cdef Py_ssize_t[::1] counts = np.zeros(c_max, dtype=np.intp)
    cdef Py_ssize_t[::1] active = np.empty(c_max, dtype=np.intp)
    cdef Py_ssize_t n, s, a, c, d, k, best, off
    cdef double d2, v
    with nogil:
        for n in range(N):
            k = _active_set(genomes, n, c_max, &active[0])
            if k == 0:
                continue
            for c in range(c_max):
                counts[c] = 0
                for d in range(D):
                    sums[c, d] = 0.0
            for s in range(S):
                best = _nearest(genomes, n, X_assign, s, &active[0], k, c_max, D, &d2)
                counts[best] += 1
                for d in range(D):
                    sums[best, d] += X_mean[s, d]
            for a in range(k):
                c = active[a]
                if counts[c] == 0:
                    out[n, c] = 0.0
                    continue
                off = c_max + c * D
                for d in range(D):
                    v = sums[c, d] / counts[c]
                    if v < lo[d]:
                        v = lo[d]
                    elif v > hi[d]:
                        v = hi[d]
                    out[n, off + d] = v
    return out_arr


def evaluate(const double[:, ::1] genomes, const double[:, ::1] X, Py_ssize_t c_max):
    """Compactness (sum of unsquared nearest distances) and separation per row."""
    cdef Py_ssize_t N = genomes.shape[0], S = X.shape[0], D = X.shape[1]
    F_arr = np.empty((N, 2), dtype=np.float64)
    cdef double[:, ::1] F = F_arr
    cdef Py_ssize_t[::1] active = np.empty(c_max, dtype=np.intp)
    cdef Py_ssize_t n, s, a, b, d, k, ca, cb
    cdef double d2, total, diff, acc, min_d2
    with nogil:
        for n in range(N):
            k = _active_set(genomes, n, c_max, &active[0])
            if k == 0:
                F[n, 0] = INFINITY
                F[n, 1] = SEP_PENALTY
                continue
            total = 0.0
            for s in range(S):
                _nearest(genomes, n, X, s, &active[0], k, c_max, D, &d2)
                total += sqrt(d2)
            F[n, 0] = total
            min_d2 = INFINITY
            for a in range(k):
                ca = c_max + active[a] * D
                for b in range(a + 1, k):
                    cb = c_max + active[b] * D
                    acc = 0.0
                    for d in range(D):
                        diff = genomes[n, ca + d] - genomes[n, cb + d]
                        acc += diff * diff
                    if acc < min_d2:
                        min_d2 = acc
            if k < 2 or min_d2 == 0.0:
                F[n, 1] = SEP_PENALTY
            else:
                F[n, 1] = 1.0 / sqrt(min_d2)
                if F[n, 1] > SEP_PENALTY:
                    F[n, 1] = SEP_PENALTY
    return F_arr


def _pareto_ranks_2d(const double[:, ::1] F):
    # Sweep in lexicographic order. Every earlier point has f1 <= the current
    # f1, and the last point placed in a front has that front's smallest f2,
    # so it alone decides whether the front dominates the current point.
    cdef Py_ssize_t n = F.shape[0]
    order_arr = np.lexsort((np.asarray(F[:, 1]), np.asarray(F[:, 0])))
    cdef Py_ssize_t[::1] order = order_arr.astype(np.intp)
    ranks_arr = np.zeros(n, dtype=np.int64)
    cdef long long[::1] ranks = ranks_arr
    cdef double[::1] last1 = np.empty(n)
    cdef double[::1] last2 = np.empty(n)
    cdef Py_ssize_t i, p, k, n_fronts = 0
    cdef double a, b
    with nogil:
        for i in range(n):
            p = order[i]
            a = F[p, 0]
            b = F[p, 1]
            k = 0
            while k < n_fronts:
                if last2[k] < b or (last2[k] == b and last1[k] < a):
                    k += 1
                else:
                    break
            if k == n_fronts:
                n_fronts += 1
            last1[k] = a
            last2[k] = b
            ranks[p] = k + 1
    return ranks_arr


def pareto_ranks(const double[:, ::1] F):
    """Front index per row (1 = non-dominated) under componentwise minimisation."""
    cdef Py_ssize_t n = F.shape[0], m = F.shape[1]
    if m == 2:
        return _pareto_ranks_2d(F)
    ranks_arr = np.zeros(n, dtype=np.int64)
    cdef long long[::1] ranks = ranks_arr
    cdef unsigned char[:, ::1] dom = np.zeros((n, n), dtype=np.uint8)
    cdef Py_ssize_t[::1] count = np.zeros(n, dtype=np.intp)
    cdef Py_ssize_t[::1] front = np.empty(n, dtype=np.intp)
    cdef Py_ssize_t i, j, k, f, n_front, assigned = 0
    cdef bint le, lt
    cdef long long level = 1
    with nogil:
        for i in range(n):
            for j in range(n):
                le = True
                lt = False
                for k in range(m):
                    if F[i, k] > F[j, k]:
                        le = False
                        break
                    if F[i, k] < F[j, k]:
                        lt = True
                if le and lt:
                    dom[i, j] = 1
                    count[j] += 1
        while assigned < n:
            n_front = 0
            for i in range(n):
                if ranks[i] == 0 and count[i] == 0:
                    front[n_front] = i
                    n_front += 1
            for f in range(n_front):
                ranks[front[f]] = level
            for f in range(n_front):
                i = front[f]
                for j in range(n):
                    if dom[i, j]:
                        count[j] -= 1
            assigned += n_front
            level += 1
    return ranks_arr
