"""Pure-Python reference implementations of the hot kernels.

Graphs are passed as lists of neighbour bitmasks: bit ``j`` of ``adj[i]`` is set
iff ``i`` and ``j`` are adjacent.  The compiled module mirrors these signatures.
"""
from __future__ import annotations

import numpy as np


def _low_bit(mask: int) -> int:
    return (mask & -mask).bit_length() - 1


def _clique_cover_bound(P: int, adj: list[int], weights: list[float]) -> float:
    # Greedy partition of P into cliques; an independent set meets each clique
    # at most once, so the sum of clique maxima bounds its weight.
    total = 0.0
    while P:
        v = _low_bit(P)
        clique = 1 << v
        top = weights[v]
        cand = P & adj[v]
        while cand:
            u = _low_bit(cand)
            clique |= 1 << u
            if weights[u] > top:
                top = weights[u]
            cand &= adj[u]
        P &= ~clique
        total += top
    return total


def max_weight_independent_set(adj: list[int], weights: list[float]) -> int:
    """Return the bitmask of a maximum-weight independent set.

    Vertices with non-positive weight are never chosen.  Ties are broken by
    the first set found in the branching order (heaviest vertex first).
    """
    n = len(adj)
    P0 = 0
    for v in range(n):
        if weights[v] > 0:
            P0 |= 1 << v
    best_w = 0.0
    best_set = 0
    stack = [(P0, 0.0, 0)]
    while stack:
        P, cur_w, cur_set = stack.pop()
        if P == 0:
            if cur_w > best_w:
                best_w, best_set = cur_w, cur_set
            continue
        if cur_w + _clique_cover_bound(P, adj, weights) <= best_w:
            continue
        # branch on the heaviest remaining vertex
        v = -1
        wv = -1.0
        rest = P
        while rest:
            u = _low_bit(rest)
            rest &= rest - 1
            if weights[u] > wv:
                v, wv = u, weights[u]
        bit = 1 << v
        stack.append((P & ~bit, cur_w, cur_set))
        stack.append((P & ~bit & ~adj[v], cur_w + wv, cur_set | bit))
    return best_set


def independent_sets(adj: list[int], limit: int) -> list[int]:
    """All independent sets (including the empty set) as sorted bitmasks.

    Raises ``OverflowError`` once more than ``limit`` sets are found.
    """
    n = len(adj)
    out = [0]

    def extend(cur: int, allowed: int) -> None:
        while allowed:
            v = _low_bit(allowed)
            allowed &= allowed - 1
            new = cur | (1 << v)
            out.append(new)
            if len(out) > limit:
                raise OverflowError("independent set enumeration exceeded limit")
            extend(new, allowed & ~adj[v])

    extend(0, (1 << n) - 1)
    out.sort()
    return out


def maximal_cliques(adj: list[int]) -> list[int]:
    """Maximal cliques by Bron-Kerbosch with Tomita pivoting, sorted bitmasks."""
    n = len(adj)
    out: list[int] = []

    def expand(R: int, P: int, X: int) -> None:
        if P == 0:
            if X == 0:
                out.append(R)
            return
        # pivot maximising |P & N(u)| over u in P | X
        best = -1
        pivot = 0
        rest = P | X
        while rest:
            u = _low_bit(rest)
            rest &= rest - 1
            c = bin(P & adj[u]).count("1")
            if c > best:
                best, pivot = c, u
        cand = P & ~adj[pivot]
        while cand:
            v = _low_bit(cand)
            cand &= cand - 1
            bit = 1 << v
            expand(R | bit, P & adj[v], X & adj[v])
            P &= ~bit
            X |= bit

    if n:
        expand(0, (1 << n) - 1, 0)
    out.sort()
    return out


def fw_quadratic(G: np.ndarray, b: np.ndarray, lam: np.ndarray, tol: float,
                 max_iter: int):
    """Away-step Frank-Wolfe for ``min lam^T G lam - 2 b^T lam`` on the simplex.

    ``G`` is the Gram matrix of the atoms and ``b`` their inner products with
    the target.  Returns ``(lam, gap, iters)``
    where ``gap`` is the last Frank-Wolfe duality gap.
    """
    lam = np.array(lam, dtype=float)
    h = G @ lam
    gap = np.inf
    it = 0
    for it in range(1, max_iter + 1):
        grad = 2.0 * (h - b)
        s = int(np.argmin(grad))
        lg = float(grad @ lam)
        gap = lg - grad[s]
        if gap <= tol:
            break
        active = np.flatnonzero(lam > 0.0)
        a = int(active[np.argmax(grad[active])])
        away_gap = grad[a] - lg
        lhl = float(lam @ h)
        if gap >= away_gap:
            # direction e_s - lam
            slope = grad[s] - lg
            curv = G[s, s] - 2.0 * h[s] + lhl
            gmax = 1.0
            gamma = gmax if curv <= 0 else min(gmax, -slope / (2.0 * curv))
            lam *= 1.0 - gamma
            lam[s] += gamma
        else:
            # direction lam - e_a
            slope = lg - grad[a]
            curv = lhl - 2.0 * h[a] + G[a, a]
            gmax = lam[a] / (1.0 - lam[a]) if lam[a] < 1.0 else np.inf
            gamma = gmax if curv <= 0 else min(gmax, -slope / (2.0 * curv))
            lam *= 1.0 + gamma
            lam[a] -= gamma
            if gamma == gmax:
                lam[a] = 0.0
        lam[lam < 0.0] = 0.0
        h = G @ lam
    return lam, float(gap), it
