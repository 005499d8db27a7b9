# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the kernels in ``_pykernels`` (graphs up to 64 vertices)."""
import numpy as np

ctypedef unsigned long long u64

cdef extern from *:
    int __builtin_ctzll(unsigned long long) nogil
    int __builtin_popcountll(unsigned long long) nogil


cdef inline int low_bit(u64 m) noexcept nogil:
    return __builtin_ctzll(m)


def _to_masks(adj):
    n = len(adj)
    if n > 64:
        raise OverflowError("compiled kernels support at most 64 vertices")
    return n


cdef double clique_cover_bound(u64 P, u64* adj, double* w) noexcept nogil:
    cdef double total = 0.0, top
    cdef u64 clique, cand
    cdef int v, u
    while P:
        v = low_bit(P)
        clique = (<u64>1) << v
        top = w[v]
        cand = P & adj[v]
        while cand:
            u = low_bit(cand)
            clique |= (<u64>1) << u
            if w[u] > top:
                top = w[u]
            cand &= adj[u]
        P &= ~clique
        total += top
    return total


cdef void mwis_rec(u64 P, double cur_w, u64 cur_set, u64* adj, double* w,
                   double* best_w, u64* best_set) noexcept nogil:
    cdef int v, u
    cdef double wv
    cdef u64 rest, bit
    if P == 0:
        if cur_w > best_w[0]:
            best_w[0] = cur_w
            best_set[0] = cur_set
        return
    if cur_w + clique_cover_bound(P, adj, w) <= best_w[0]:
        return
    v = -1
    wv = -1.0
    rest = P
    while rest:
        u = low_bit(rest)
        rest &= rest - 1
        if w[u] > wv:
            v = u
            wv = w[u]
    bit = (<u64>1) << v
    mwis_rec(P & ~bit & ~adj[v], cur_w + wv, cur_set | bit, adj, w, best_w, best_set)
    mwis_rec(P & ~bit, cur_w, cur_set, adj, w, best_w, best_set)


def max_weight_independent_set(adj, weights):
    cdef int n = _to_masks(adj)
    cdef u64[64] A
    cdef double[64] W
    cdef u64 P0 = 0, best_set = 0
    cdef double best_w = 0.0
    cdef int v
    for v in range(n):
        A[v] = <u64>adj[v]
        W[v] = float(weights[v])
        if W[v] > 0:
            P0 |= (<u64>1) << v
    with nogil:
        mwis_rec(P0, 0.0, 0, A, W, &best_w, &best_set)
    return int(best_set)


cdef class _Collector:
    cdef list out
    cdef Py_ssize_t limit


cdef int indep_rec(u64 cur, u64 allowed, u64* adj, _Collector col) except -1:
    cdef int v
    cdef u64 new
    while allowed:
        v = low_bit(allowed)
        allowed &= allowed - 1
        new = cur | ((<u64>1) << v)
        col.out.append(new)
        if len(col.out) > col.limit:
            raise OverflowError("independent set enumeration exceeded limit")
        indep_rec(new, allowed & ~adj[v], adj, col)
    return 0


def independent_sets(adj, limit):
    cdef int n = _to_masks(adj)
    cdef u64[64] A
    cdef int v
    for v in range(n):
        A[v] = <u64>adj[v]
    col = _Collector()
    col.out = [0]
    col.limit = limit
    cdef u64 full = ((<u64>1) << n) - 1 if n < 64 else <u64>0xFFFFFFFFFFFFFFFF
    indep_rec(0, full, A, col)
    col.out.sort()
    return col.out


cdef int bk_rec(u64 R, u64 P, u64 X, u64* adj, list out) except -1:
    cdef int best = -1, c, u, v, pivot = 0
    cdef u64 rest, cand, bit
    if P == 0:
        if X == 0:
            out.append(R)
        return 0
    rest = P | X
    while rest:
        u = low_bit(rest)
        rest &= rest - 1
        c = __builtin_popcountll(P & adj[u])
        if c > best:
            best = c
            pivot = u
    cand = P & ~adj[pivot]
    while cand:
        v = low_bit(cand)
        cand &= cand - 1
        bit = (<u64>1) << v
        bk_rec(R | bit, P & adj[v], X & adj[v], adj, out)
        P &= ~bit
        X |= bit
    return 0


def maximal_cliques(adj):
    cdef int n = _to_masks(adj)
    cdef u64[64] A
    cdef int v
    out = []
    if n == 0:
        return out
    for v in range(n):
        A[v] = <u64>adj[v]
    cdef u64 full = ((<u64>1) << n) - 1 if n < 64 else <u64>0xFFFFFFFFFFFFFFFF
    bk_rec(0, full, 0, A, out)
    out.sort()
    return out


def fw_quadratic(double[:, ::1] G, double[::1] b, lam0, double tol, long max_iter):
    cdef Py_ssize_t m = G.shape[0], i, s, a
    lam_arr = np.array(lam0, dtype=np.float64)
    h_arr = np.zeros(m)
    cdef double[::1] lam = lam_arr
    cdef double[::1] h = h_arr
    cdef double gap = np.inf, lg, gs, ga, lhl, slope, curv, gmax, gamma, gi
    cdef long it = 0, k
    with nogil:
        for i in range(m):
            h[i] = 0.0
            for k in range(m):
                h[i] += G[i, k] * lam[k]
        it = 0
        while it < max_iter:
            it += 1
            s = 0
            a = -1
            gs = 1e300
            ga = -1e300
            lg = 0.0
            lhl = 0.0
            for i in range(m):
                gi = 2.0 * (h[i] - b[i])
                lg += gi * lam[i]
                lhl += lam[i] * h[i]
                if gi < gs:
                    gs = gi
                    s = i
                if lam[i] > 0.0 and gi > ga:
                    ga = gi
                    a = i
            gap = lg - gs
            if gap <= tol:
                break
            if gap >= ga - lg:
                slope = gs - lg
                curv = G[s, s] - 2.0 * h[s] + lhl
                gamma = 1.0
                if curv > 0 and -slope / (2.0 * curv) < 1.0:
                    gamma = -slope / (2.0 * curv)
                for i in range(m):
                    lam[i] *= 1.0 - gamma
                    h[i] = (1.0 - gamma) * h[i] + gamma * G[i, s]
                lam[s] += gamma
            else:
                slope = lg - ga
                curv = lhl - 2.0 * h[a] + G[a, a]
                gmax = 1e300
                if lam[a] < 1.0:
                    gmax = lam[a] / (1.0 - lam[a])
                gamma = gmax
                if curv > 0 and -slope / (2.0 * curv) < gmax:
                    gamma = -slope / (2.0 * curv)
                for i in range(m):
                    lam[i] *= 1.0 + gamma
                    h[i] = (1.0 + gamma) * h[i] - gamma * G[i, a]
                lam[a] -= gamma
                if gamma == gmax:
                    lam[a] = 0.0
            for i in range(m):
                if lam[i] < 0.0:
                    lam[i] = 0.0
            if it % 32 == 0:
                # refresh the cached product to stop drift
                for i in range(m):
                    h[i] = 0.0
                    for k in range(m):
                        h[i] += G[i, k] * lam[k]
    return lam_arr, float(gap), int(it)
