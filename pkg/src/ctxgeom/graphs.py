"""Undirected simple graphs and the combinatorial algorithms built on them."""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from itertools import combinations
from typing import Iterable, Sequence

from . import _kernels
from ._numeric import to_number
from .errors import DomainError, ResourceLimitError

MAX_CLIQUE_VERTICES = 64
MAX_MINOR_VERTICES = 16
MAX_AUTOMORPHISM_VERTICES = 16


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph on vertices ``0..n-1``.

    Edges are stored as pairs ``(i, j)`` with ``i < j``.  Their order is the
    order in which they were supplied; :meth:`from_edges` sorts them unless
    asked not to.  Named families keep a documented order (cycles list their
    edges cyclically) so that edge coordinates line up with the usual
    inequalities.  ``weights`` holds optional nonnegative vertex weights.
    """

    n: int
    edges: tuple
    weights: tuple | None = None

    def __post_init__(self):
        if self.n < 0:
            raise DomainError("vertex count must be nonnegative")
        seen = set()
        norm = []
        for e in self.edges:
            i, j = (int(e[0]), int(e[1]))
            if i == j:
                raise DomainError(f"loop at vertex {i}")
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise DomainError(f"edge {e} out of range for {self.n} vertices")
            if i > j:
                i, j = j, i
            if (i, j) in seen:
                raise DomainError(f"duplicate edge {(i, j)}")
            seen.add((i, j))
            norm.append((i, j))
        object.__setattr__(self, "edges", tuple(norm))
        if self.weights is not None:
            w = tuple(to_number(x) for x in self.weights)
            if len(w) != self.n:
                raise DomainError("weights length must equal vertex count")
            if any(x < 0 for x in w):
                raise DomainError("vertex weights must be nonnegative")
            object.__setattr__(self, "weights", w)

    @classmethod
    def from_edges(cls, n: int, edges: Iterable, weights=None, sort: bool = True) -> "Graph":
        es = [tuple(sorted((int(a), int(b)))) for a, b in edges]
        if sort:
            es.sort()
        return cls(n, tuple(es), None if weights is None else tuple(weights))

    @cached_property
    def adjacency(self) -> tuple:
        adj = [set() for _ in range(self.n)]
        for i, j in self.edges:
            adj[i].add(j)
            adj[j].add(i)
        return tuple(frozenset(a) for a in adj)

    @cached_property
    def masks(self) -> list:
        out = [0] * self.n
        for i, j in self.edges:
            out[i] |= 1 << j
            out[j] |= 1 << i
        return out

    @cached_property
    def edge_index(self) -> dict:
        idx = {}
        for k, (i, j) in enumerate(self.edges):
            idx[(i, j)] = k
            idx[(j, i)] = k
        return idx

    def has_edge(self, i: int, j: int) -> bool:
        return j in self.adjacency[i]

    def degree(self, v: int) -> int:
        return len(self.adjacency[v])

    def vertex_weights(self) -> tuple:
        """Weights, defaulting to all ones."""
        if self.weights is None:
            return tuple(1 for _ in range(self.n))
        return self.weights

    def with_weights(self, weights) -> "Graph":
        return Graph(self.n, self.edges, tuple(weights))

    def relabel(self, perm: Sequence[int]) -> "Graph":
        """Graph with vertex ``v`` renamed ``perm[v]``."""
        es = [(perm[i], perm[j]) for i, j in self.edges]
        w = None
        if self.weights is not None:
            w = [None] * self.n
            for v in range(self.n):
                w[perm[v]] = self.weights[v]
        return Graph.from_edges(self.n, es, w)

    def is_independent(self, vertices: Iterable[int]) -> bool:
        vs = list(vertices)
        return all(not self.has_edge(a, b) for a, b in combinations(vs, 2))

    def is_clique(self, vertices: Iterable[int]) -> bool:
        vs = list(vertices)
        return all(self.has_edge(a, b) for a, b in combinations(vs, 2))


def complement(G: Graph) -> Graph:
    es = [(i, j) for i, j in combinations(range(G.n), 2) if not G.has_edge(i, j)]
    return Graph(G.n, tuple(es), G.weights)


def induced_subgraph(G: Graph, vertices: Sequence[int]) -> Graph:
    """Subgraph induced on ``vertices``, renumbered in the given order."""
    pos = {v: k for k, v in enumerate(vertices)}
    es = [(pos[i], pos[j]) for i, j in G.edges if i in pos and j in pos]
    return Graph.from_edges(len(vertices), es)


def suspension(G: Graph) -> Graph:
    """Add an apex vertex (index ``G.n``) joined to every vertex.

    The apex edges ``(i, n)`` come first, followed by the edges of ``G`` in
    their original order.  This matches the coordinate layout of expectation
    vectors (marginal block, then edge block).
    """
    n = G.n
    es = tuple((i, n) for i in range(n)) + G.edges
    return Graph(n + 1, es)


def _mask_to_tuple(mask: int) -> tuple:
    out = []
    v = 0
    while mask:
        if mask & 1:
            out.append(v)
        mask >>= 1
        v += 1
    return tuple(out)


def maximal_cliques(G: Graph) -> list:
    """All maximal cliques as sorted vertex tuples, in lexicographic order."""
    if G.n > MAX_CLIQUE_VERTICES:
        raise ResourceLimitError(f"maximal_cliques supports at most {MAX_CLIQUE_VERTICES} vertices")
    cliques = [_mask_to_tuple(m) for m in _kernels.maximal_cliques(G.masks)]
    if G.n and not cliques:
        cliques = []
    return sorted(cliques)


def independent_sets(G: Graph, limit: int = 1 << 22) -> list:
    """All independent sets (empty set included) as sorted vertex tuples.

    Sets are ordered by their bitmask value, vertex ``i`` being bit ``i``.
    """
    try:
        masks = _kernels.independent_sets(G.masks, limit)
    except OverflowError as exc:
        raise ResourceLimitError(str(exc)) from None
    return [_mask_to_tuple(m) for m in masks]


def max_weight_independent_set(G: Graph, weights=None) -> tuple:
    """Exact maximum-weight independent set by branch and bound."""
    w = G.vertex_weights() if weights is None else tuple(to_number(x) for x in weights)
    if any(x < 0 for x in w):
        raise DomainError("weights must be nonnegative")
    mask = _kernels.max_weight_independent_set(G.masks, [float(x) for x in w])
    return _mask_to_tuple(mask)


def chordless_cycles(G: Graph, max_len: int | None = None) -> list:
    """Induced cycles of length 3..max_len, each listed once.

    A cycle is reported as a vertex tuple starting at its smallest vertex,
    with the second vertex smaller than the last (this fixes the direction).
    The list is ordered by length, then lexicographically.
    """
    if max_len is None:
        max_len = G.n
    adj = G.adjacency
    found = []

    def extend(path: list, on_path: set, start: int):
        last = path[-1]
        for v in sorted(adj[last]):
            if v <= start or v in on_path:
                continue
            # v may only touch the path at ``last`` (and at ``start`` when it closes)
            if any(u in adj[v] for u in path[1:-1]):
                continue
            if start in adj[v]:
                if len(path) >= 2 and path[1] < v:
                    found.append(tuple(path) + (v,))
                continue
            if len(path) + 1 < max_len:
                path.append(v)
                on_path.add(v)
                extend(path, on_path, start)
                path.pop()
                on_path.discard(v)

    for s in range(G.n):
        for v1 in sorted(adj[s]):
            if v1 <= s:
                continue
            extend([s, v1], {s, v1}, s)
    found = [c for c in found if len(c) <= max_len]
    return sorted(found, key=lambda c: (len(c), c))


def cycle_edge_indices(G: Graph, cycle: Sequence[int]) -> list:
    """Edge indices of ``G`` traversed by the closed walk ``cycle``."""
    k = len(cycle)
    return [G.edge_index[(cycle[t], cycle[(t + 1) % k])] for t in range(k)]


# --- minors -----------------------------------------------------------------

def _contains_subgraph(adj: list, H: Graph) -> bool:
    """Whether ``H`` embeds injectively into the graph given by ``adj`` (sets)."""
    k = len(adj)
    if H.n > k:
        return False
    order = sorted(range(H.n), key=lambda v: -H.degree(v))
    hdeg = [H.degree(v) for v in range(H.n)]
    gdeg = [len(a) for a in adj]
    image = {}
    used = set()

    def place(t: int) -> bool:
        if t == len(order):
            return True
        h = order[t]
        for g in range(k):
            if g in used or gdeg[g] < hdeg[h]:
                continue
            if all((image[u] in adj[g]) for u in H.adjacency[h] if u in image):
                image[h] = g
                used.add(g)
                if place(t + 1):
                    return True
                del image[h]
                used.discard(g)
        return False

    return place(0)


def _reduce(adj: list, min_deg: int) -> list:
    # Deletions/suppressions that cannot destroy a minor of minimum degree min_deg.
    adj = [set(a) for a in adj]
    alive = set(range(len(adj)))
    changed = True
    while changed:
        changed = False
        for v in sorted(alive):
            d = len(adj[v])
            if d == 0 and min_deg >= 1 or d == 1 and min_deg >= 2:
                for u in adj[v]:
                    adj[u].discard(v)
                adj[v] = set()
                alive.discard(v)
                changed = True
            elif d == 2 and min_deg >= 3:
                a, b = adj[v]
                adj[a].discard(v)
                adj[b].discard(v)
                adj[a].add(b)
                adj[b].add(a)
                adj[v] = set()
                alive.discard(v)
                changed = True
    keep = sorted(alive)
    pos = {v: i for i, v in enumerate(keep)}
    return [set(pos[u] for u in adj[v]) for v in keep]


def _relabel_key(adj: list):
    # Deterministic relabelling by a degree-based refinement; equal keys mean
    # identical labelled graphs, so memoising on the key is sound.
    k = len(adj)
    color = [len(a) for a in adj]
    for _ in range(2):
        color = [hash((color[v], tuple(sorted(color[u] for u in adj[v])))) for v in range(k)]
    order = sorted(range(k), key=lambda v: (color[v], v))
    pos = {v: i for i, v in enumerate(order)}
    new = [set() for _ in range(k)]
    for v in range(k):
        for u in adj[v]:
            new[pos[v]].add(pos[u])
    key = (k, frozenset((min(a, b), max(a, b)) for a in range(k) for b in new[a]))
    return key, new


def has_minor(G: Graph, H: Graph) -> bool:
    """Exhaustive minor test: is ``H`` a minor of ``G``?

    Searches over edge contractions of ``G`` (memoised) and tests subgraph
    containment at every stage; deletions are implicit in the containment
    test.  Degree-0/1 vertices are deleted and degree-2 vertices suppressed
    when the minimum degree of ``H`` allows it.
    """
    if G.n > MAX_MINOR_VERTICES:
        raise ResourceLimitError(f"has_minor supports at most {MAX_MINOR_VERTICES} vertices")
    if H.n == 0:
        return True
    min_deg = min(H.degree(v) for v in range(H.n))
    target_m = len(H.edges)
    seen = set()

    def search(adj: list) -> bool:
        adj = _reduce(adj, min_deg)
        k = len(adj)
        m = sum(len(a) for a in adj) // 2
        if k < H.n or m < target_m:
            return False
        key, adj = _relabel_key(adj)
        if key in seen:
            return False
        seen.add(key)
        if _contains_subgraph(adj, H):
            return True
        if k == H.n:
            return False
        for u in range(k):
            for v in adj[u]:
                if v <= u:
                    continue
                # contract v into u
                new = [set(a) for a in adj]
                for w in new[v]:
                    if w != u:
                        new[w].discard(v)
                        new[w].add(u)
                        new[u].add(w)
                new[u].discard(v)
                new[v] = set()
                keep = [x for x in range(k) if x != v]
                pos = {x: i for i, x in enumerate(keep)}
                shrunk = [set(pos[y] for y in new[x] if y != v) for x in keep]
                if search(shrunk):
                    return True
        return False

    return search([set(a) for a in G.adjacency])


# --- automorphisms ------------------------------------------------------------

def _refined_colors(G: Graph) -> list:
    color = [G.degree(v) for v in range(G.n)]
    for _ in range(G.n):
        sig = [(color[v], tuple(sorted(color[u] for u in G.adjacency[v]))) for v in range(G.n)]
        palette = {s: i for i, s in enumerate(sorted(set(sig)))}
        new = [palette[s] for s in sig]
        if len(set(new)) == len(set(color)):
            return new
        color = new
    return color


def graph_automorphisms(G: Graph) -> list:
    """All automorphisms as permutation tuples ``perm`` (``v -> perm[v]``), sorted."""
    if G.n > MAX_AUTOMORPHISM_VERTICES:
        raise ResourceLimitError(
            f"graph_automorphisms supports at most {MAX_AUTOMORPHISM_VERTICES} vertices")
    n = G.n
    color = _refined_colors(G)
    adj = G.adjacency
    out = []
    image = [-1] * n
    used = [False] * n

    def place(v: int):
        if v == n:
            out.append(tuple(image))
            return
        for g in range(n):
            if used[g] or color[g] != color[v]:
                continue
            ok = True
            for u in range(v):
                if (u in adj[v]) != (image[u] in adj[g]):
                    ok = False
                    break
            if ok:
                image[v] = g
                used[g] = True
                place(v + 1)
                used[g] = False
                image[v] = -1

    place(0)
    return sorted(out)


def is_automorphism(G: Graph, perm: Sequence[int]) -> bool:
    if sorted(perm) != list(range(G.n)):
        return False
    return all(G.has_edge(perm[i], perm[j]) for i, j in G.edges)


# --- named families -----------------------------------------------------------

def _cycle_edges(vertices: Sequence[int]) -> list:
    k = len(vertices)
    return [(vertices[t], vertices[(t + 1) % k]) for t in range(k)]


def named_graph(family: str, n, base: str = "cycle") -> Graph:
    """Graph from a named family.

    Families and vertex numbering:

    * ``cycle`` (n >= 3): vertices in cyclic order; edges (0,1),(1,2),...,(0,n-1).
    * ``path`` (n >= 1): edges (0,1),...,(n-2,n-1).
    * ``complete`` (n >= 1): edges in lexicographic order.
    * ``empty`` (n >= 0): no edges.
    * ``complete-bipartite``: ``n`` is ``a`` (giving K_{a,a}) or a pair ``(a, b)``;
      parts are 0..a-1 and a..a+b-1.
    * ``prism`` (n >= 3): outer cycle 0..n-1, inner cycle n..2n-1, spokes (i, i+n).
    * ``moebius-ladder`` (n even >= 4, the vertex count): cycle 0..n-1 plus
      the chords (i, i+n/2).
    * ``suspension-of`` / ``wheel``: suspension of ``named_graph(base, n)``.
    """
    fam = family.lower()
    if fam == "cycle":
        if n < 3:
            raise DomainError("cycle needs n >= 3")
        return Graph(n, tuple(_cycle_edges(range(n))))
    if fam == "path":
        if n < 1:
            raise DomainError("path needs n >= 1")
        return Graph(n, tuple((i, i + 1) for i in range(n - 1)))
    if fam == "complete":
        if n < 1:
            raise DomainError("complete graph needs n >= 1")
        return Graph(n, tuple(combinations(range(n), 2)))
    if fam == "empty":
        if n < 0:
            raise DomainError("empty graph needs n >= 0")
        return Graph(n, ())
    if fam == "complete-bipartite":
        a, b = (n, n) if isinstance(n, int) else (int(n[0]), int(n[1]))
        if a < 1 or b < 1:
            raise DomainError("complete-bipartite needs positive part sizes")
        return Graph(a + b, tuple((i, a + j) for i in range(a) for j in range(b)))
    if fam == "prism":
        if n < 3:
            raise DomainError("prism needs n >= 3")
        es = _cycle_edges(range(n)) + _cycle_edges(range(n, 2 * n)) + [(i, i + n) for i in range(n)]
        return Graph(2 * n, tuple(es))
    if fam in ("moebius-ladder", "mobius-ladder", "möbius-ladder"):
        if n < 4 or n % 2:
            raise DomainError("moebius-ladder needs an even vertex count >= 4")
        es = _cycle_edges(range(n)) + [(i, i + n // 2) for i in range(n // 2)]
        return Graph(n, tuple(es))
    if fam in ("suspension-of", "wheel"):
        return suspension(named_graph(base, n))
    raise DomainError(f"unknown graph family {family!r}")
