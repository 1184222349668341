# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels for column-compressed walk matrices.

Every routine here has a numpy twin in ``_fallback`` with the same
signature and the same summation order.
"""

import numpy as np
cimport numpy as cnp
from libc.stdint cimport uint64_t

cnp.import_array()

HAS_FUSED_NNLAD = True
NAME = "compiled"


cdef extern from *:
    int __builtin_popcountll(unsigned long long) nogil


cdef inline void _matvec(const int[:, ::1] cols, const double[::1] x,
                         double[::1] out) noexcept nogil:
    cdef Py_ssize_t n, j, m
    cdef Py_ssize_t N = cols.shape[0], D = cols.shape[1], M = out.shape[0]
    cdef double xv
    for m in range(M):
        out[m] = 0.0
    for n in range(N):
        xv = x[n]
        for j in range(D):
            out[cols[n, j]] += xv
    for m in range(M):
        out[m] = out[m] / D


cdef inline void _rmatvec(const int[:, ::1] cols, const double[::1] w,
                          double[::1] out) noexcept nogil:
    cdef Py_ssize_t n, j
    cdef Py_ssize_t N = cols.shape[0], D = cols.shape[1]
    cdef double acc
    for n in range(N):
        acc = 0.0
        for j in range(D):
            acc += w[cols[n, j]]
        out[n] = acc / D


def matvec(const int[:, ::1] cols, Py_ssize_t n_rows, const double[::1] x):
    out = np.empty(n_rows, dtype=np.float64)
    cdef double[::1] o = out
    with nogil:
        _matvec(cols, x, o)
    return out


def rmatvec(const int[:, ::1] cols, const double[::1] w):
    out = np.empty(cols.shape[0], dtype=np.float64)
    cdef double[::1] o = out
    with nogil:
        _rmatvec(cols, w, o)
    return out


def median_neighbors(const int[:, ::1] cols, const double[::1] z):
    cdef Py_ssize_t N = cols.shape[0], D = cols.shape[1]
    cdef Py_ssize_t n, j, i
    cdef double key
    out = np.empty(N, dtype=np.float64)
    buf_arr = np.empty(D, dtype=np.float64)
    cdef double[::1] o = out
    cdef double[::1] buf = buf_arr
    with nogil:
        for n in range(N):
            for j in range(D):
                key = z[cols[n, j]]
                i = j - 1
                while i >= 0 and buf[i] > key:
                    buf[i + 1] = buf[i]
                    i -= 1
                buf[i + 1] = key
            if D % 2 == 1:
                o[n] = buf[D // 2]
            else:
                o[n] = 0.5 * (buf[D // 2 - 1] + buf[D // 2])
    return out


cdef inline bint _certified(const double[::1] xt, const double[::1] y,
                            const double[::1] w, const double[::1] wt,
                            double eps1, double eps2) noexcept nogil:
    cdef Py_ssize_t m, n
    cdef double gap = 0.0, d
    for m in range(y.shape[0]):
        d = xt[m] - y[m]
        gap += d if d >= 0 else -d
    for m in range(y.shape[0]):
        gap += y[m] * w[m]
    if gap > eps1:
        return False
    for n in range(wt.shape[0]):
        if wt[n] < -eps2:
            return False
    return True


def nnlad_steps(const int[:, ::1] cols, const double[::1] y,
                double sigma, double tau, double eps1, double eps2,
                long long n_steps, bint check,
                double[::1] x, double[::1] w, double[::1] v,
                double[::1] xt, double[::1] wt, double[::1] vt,
                double[::1] xsum, double[::1] xtsum, double[::1] wsum,
                long long[::1] counts):
    """Run up to ``n_steps`` primal-dual iterations in place.

    Returns ``(steps_done, certified)``. When ``check`` is false the
    certificate is never evaluated and exactly ``n_steps`` are taken.
    """
    cdef Py_ssize_t N = x.shape[0], M = y.shape[0]
    cdef Py_ssize_t m, n
    cdef long long it, done = n_steps
    cdef double t
    cdef bint track = xsum is not None
    cdef bint ok = False
    with nogil:
        for it in range(n_steps):
            if check and _certified(xt, y, w, wt, eps1, eps2):
                done = it
                ok = True
                break
            for m in range(M):
                t = w[m] + sigma * (vt[m] - y[m])
                if t > 1.0:
                    t = 1.0
                elif t < -1.0:
                    t = -1.0
                w[m] = t
            _rmatvec(cols, w, wt)
            counts[1] += 1
            for n in range(N):
                v[n] = -x[n]
                t = x[n] - tau * wt[n]
                x[n] = t if t > 0.0 else 0.0
                v[n] = v[n] + 2.0 * x[n]
            _matvec(cols, v, vt)
            counts[0] += 1
            for m in range(M):
                xt[m] = 0.5 * (vt[m] + xt[m])
            if track:
                for n in range(N):
                    xsum[n] += x[n]
                for m in range(M):
                    xtsum[m] += xt[m]
                    wsum[m] += w[m]
        if check and not ok:
            ok = _certified(xt, y, w, wt, eps1, eps2)
    return done, bool(ok)


def min_neighborhood_sizes(const int[:, ::1] cols, Py_ssize_t n_rows, int S):
    """Smallest |R(T)| over all T with |T| = s, for s = 1..S.

    Lexicographic depth-first enumeration with incremental bitset unions.
    Entry 0 of the result is unused.
    """
    cdef Py_ssize_t N = cols.shape[0], D = cols.shape[1]
    cdef Py_ssize_t W = (n_rows + 63) // 64
    cdef Py_ssize_t n, j, k, depth, r
    cdef int c
    masks_arr = np.zeros((N, W), dtype=np.uint64)
    stack_arr = np.zeros((S + 1, W), dtype=np.uint64)
    idx_arr = np.zeros(S + 1, dtype=np.intp)
    best_arr = np.full(S + 1, n_rows + 1, dtype=np.int64)
    cdef uint64_t[:, ::1] masks = masks_arr
    cdef uint64_t[:, ::1] stack = stack_arr
    cdef Py_ssize_t[::1] idx = idx_arr
    cdef long long[::1] best = best_arr
    for n in range(N):
        for j in range(D):
            r = cols[n, j]
            masks[n, r // 64] |= (<uint64_t>1) << (r % 64)
    if S <= 0 or N == 0:
        return best_arr
    with nogil:
        # idx[depth] is the column chosen at level depth (1-based levels)
        depth = 1
        idx[1] = 0
        while depth >= 1:
            n = idx[depth]
            if n >= N:
                depth -= 1
                if depth >= 1:
                    idx[depth] += 1
                continue
            c = 0
            for k in range(W):
                stack[depth, k] = stack[depth - 1, k] | masks[n, k]
                c += __builtin_popcountll(stack[depth, k])
            if c < best[depth]:
                best[depth] = c
            if depth < S and n + 1 < N:
                depth += 1
                idx[depth] = n + 1
            else:
                idx[depth] += 1
    return best_arr
