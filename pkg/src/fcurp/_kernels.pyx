# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled tour local search and oracle walk search.

Mirrors ``_kernels_py`` exactly; see that module for the reference semantics.
"""
import math

import numpy as np
cimport numpy as cnp

cnp.import_array()

cdef double EPS = 1e-10
cdef double TOL = 1e-9


cdef void _reverse(long[::1] t, Py_ssize_t lo, Py_ssize_t hi) noexcept nogil:
    cdef long tmp
    while lo < hi:
        tmp = t[lo]
        t[lo] = t[hi]
        t[hi] = tmp
        lo += 1
        hi -= 1


cdef bint _two_opt(long[::1] t, const double[:, ::1] d) noexcept nogil:
    cdef Py_ssize_t n = t.shape[0]
    cdef Py_ssize_t i, j, jmax
    cdef long a, b, c, e
    cdef double dab, delta
    cdef bint improved = False, again = True
    while again:
        again = False
        for i in range(n - 2):
            a = t[i]
            b = t[i + 1]
            dab = d[a, b]
            jmax = n if i > 0 else n - 1
            for j in range(i + 2, jmax):
                c = t[j]
                e = t[(j + 1) % n]
                delta = d[a, c] + d[b, e] - dab - d[c, e]
                if delta < -EPS:
                    _reverse(t, i + 1, j)
                    again = True
                    improved = True
                    a = t[i]
                    b = t[i + 1]
                    dab = d[a, b]
    return improved


cdef bint _or_opt(long[::1] t, long[::1] buf, const double[:, ::1] d) noexcept nogil:
    cdef Py_ssize_t n = t.shape[0]
    cdef Py_ssize_t length, i, j, k, best_j, pos, w
    cdef long first, last, prev, nxt, p, q
    cdef double gain, best, base, fwd, rev
    cdef bint best_rev, improved = False, moved = True
    while moved:
        moved = False
        for length in range(1, 4):
            if length > n - 2:
                break
            i = 1
            while i + length <= n:
                first = t[i]
                last = t[i + length - 1]
                prev = t[i - 1]
                nxt = t[(i + length) % n]
                gain = d[prev, first] + d[last, nxt] - d[prev, nxt]
                best = -EPS
                best_j = -1
                best_rev = False
                for j in range(n):
                    if i - 1 <= j <= i + length - 1:
                        continue
                    p = t[j]
                    q = t[(j + 1) % n]
                    base = d[p, q]
                    fwd = d[p, first] + d[last, q] - base - gain
                    rev = d[p, last] + d[first, q] - base - gain
                    if fwd < best:
                        best = fwd
                        best_j = j
                        best_rev = False
                    if rev < best:
                        best = rev
                        best_j = j
                        best_rev = True
                if best_j >= 0:
                    # buf = rest followed by the (possibly reversed) segment
                    w = 0
                    for pos in range(n):
                        if pos < i or pos >= i + length:
                            buf[w] = t[pos]
                            w += 1
                    for pos in range(length):
                        if best_rev:
                            buf[w + pos] = t[i + length - 1 - pos]
                        else:
                            buf[w + pos] = t[i + pos]
                    k = best_j if best_j < i else best_j - length
                    # t = rest[:k+1] + seg + rest[k+1:]
                    w = 0
                    for pos in range(k + 1):
                        t[w] = buf[pos]
                        w += 1
                    for pos in range(length):
                        t[w] = buf[n - length + pos]
                        w += 1
                    for pos in range(k + 1, n - length):
                        t[w] = buf[pos]
                        w += 1
                    moved = True
                    improved = True
                else:
                    i += 1
    return improved


def local_search(tour, dist):
    """Improve a closed tour with 2-opt and Or-opt moves until neither helps."""
    cdef long[::1] t = np.ascontiguousarray(tour, dtype=np.int_)
    cdef Py_ssize_t n = t.shape[0]
    if n < 4:
        return [int(v) for v in t]
    cdef const double[:, ::1] d = np.ascontiguousarray(dist, dtype=np.float64)
    cdef long[::1] buf = np.empty(n, dtype=np.int_)
    cdef bint improved = True
    with nogil:
        while improved:
            improved = _two_opt(t, d)
            if _or_opt(t, buf, d):
                improved = True
    return [int(v) for v in t]


def tour_length(tour, dist):
    n = len(tour)
    return sum(float(dist[tour[k]][tour[(k + 1) % n]]) for k in range(n))


cdef class _Search:
    cdef const double[:, ::1] F
    cdef const double[:, ::1] Rd
    cdef Py_ssize_t n, m
    cdef long s0, full
    cdef double U, R, best
    cdef int cap
    cdef long[::1] path
    cdef long[::1] best_path
    cdef Py_ssize_t depth, best_len

    cdef double lower(self, long cur, long mask) noexcept nogil:
        cdef double lb = self.F[cur, self.s0]
        cdef double v
        cdef Py_ssize_t t
        for t in range(self.m):
            if not (mask >> t) & 1:
                v = self.F[cur, t] + self.F[t, self.s0]
                if v > lb:
                    lb = v
        return lb

    cdef void dfs(self, long cur, double fuel, long mask, long last_site,
                  double cost, int visits) noexcept nogil:
        cdef Py_ssize_t t, s, k
        cdef double left, c
        if cost + self.lower(cur, mask) >= self.best - EPS:
            return
        for t in range(self.m):
            if (mask >> t) & 1:
                continue
            left = fuel - self.F[cur, t]
            if left < -TOL:
                continue
            self.path[self.depth] = t
            self.depth += 1
            self.dfs(t, left, mask | ((<long>1) << t), last_site, cost + self.F[cur, t], visits)
            self.depth -= 1
        if visits >= self.cap:
            return
        for s in range(self.m, self.n):
            if s == cur:
                continue
            if fuel - self.F[cur, s] < -TOL or self.Rd[last_site, s] > self.R + TOL:
                continue
            c = cost + self.F[cur, s]
            if s == self.s0 and mask == self.full:
                if c < self.best - EPS:
                    self.best = c
                    for k in range(self.depth):
                        self.best_path[k] = self.path[k]
                    self.best_path[self.depth] = self.s0
                    self.best_len = self.depth + 1
                continue
            self.path[self.depth] = s
            self.depth += 1
            self.dfs(s, self.U, mask, s, c, visits + 1)
            self.depth -= 1


def oracle_search(f, r, n_targets, s0, U, R, max_site_visits, best_cost=math.inf):
    """Exhaustive minimum-cost walk search with branch-and-bound pruning."""
    if n_targets > 62:
        raise ValueError("oracle supports at most 62 targets")
    cdef _Search st = _Search()
    st.F = np.ascontiguousarray(f, dtype=np.float64)
    st.Rd = np.ascontiguousarray(r, dtype=np.float64)
    st.n = st.F.shape[0]
    st.m = n_targets
    st.s0 = s0
    st.full = (<long>1 << n_targets) - 1 if n_targets < 63 else -1
    st.U = U
    st.R = R
    st.cap = max_site_visits
    st.best = best_cost
    size = n_targets + max_site_visits + 2
    st.path = np.zeros(size, dtype=np.int_)
    st.best_path = np.zeros(size, dtype=np.int_)
    st.path[0] = s0
    st.depth = 1
    st.best_len = 0
    with nogil:
        st.dfs(st.s0, st.U, 0, st.s0, 0.0, 0)
    return st.best, [int(st.best_path[k]) for k in range(st.best_len)]
