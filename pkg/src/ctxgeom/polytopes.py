"""Polytopes of two-outcome scenarios and the coordinate maps between them.

Coordinates for a graph ``G`` on ``n`` vertices with edge list ``E``:

* correlation space (``phi``): ``(q_0..q_{n-1}, q_e for e in E)``;
* expectation space (``psi``): ``(x_e0..x_e{n-1}, x_e for e in E)``, which are
  exactly the edge coordinates of the suspension of ``G`` because its apex
  edges come first;
* 0/1 cut space (``alpha``): ``y = (1 - x) / 2`` componentwise.

Everything here is exact when the inputs are rational.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, product
from typing import Sequence

from ._numeric import is_exact, number_to_json, to_number
from .errors import DomainError, ResourceLimitError, UnsupportedGraphError
from .graphs import Graph, chordless_cycles, cycle_edge_indices, has_minor, named_graph, suspension
from .scenario import Behavior, CompatibilityScenario, check_nondisturbance

DEFAULT_CAP = 1 << 20
ELLIPTOPE_TOL = 1e-12


@dataclass(frozen=True)
class VPolytope:
    """Convex hull of a finite vertex list."""

    vertices: tuple
    labels: tuple | None = None
    name: str = ""

    def __post_init__(self):
        verts = tuple(tuple(v) for v in self.vertices)
        if not verts:
            raise DomainError("a V-polytope needs at least one vertex")
        d = len(verts[0])
        if any(len(v) != d for v in verts):
            raise DomainError("vertices have different dimensions")
        if len(set(verts)) != len(verts):
            raise DomainError("duplicate vertices")
        if self.labels is not None and len(self.labels) != d:
            raise DomainError("one label per coordinate")
        object.__setattr__(self, "vertices", verts)

    @property
    def dimension(self) -> int:
        return len(self.vertices[0])

    def __len__(self) -> int:
        return len(self.vertices)

    def as_array(self):
        import numpy as np

        return np.array([[float(a) for a in v] for v in self.vertices])

    def to_json(self) -> dict:
        return {
            "type": "vpolytope",
            "name": self.name,
            "dimension": self.dimension,
            "labels": list(self.labels) if self.labels else None,
            "vertices": [[number_to_json(a) for a in v] for v in self.vertices],
        }

    @classmethod
    def from_json(cls, data: dict) -> "VPolytope":
        labels = tuple(data["labels"]) if data.get("labels") else None
        verts = tuple(tuple(to_number(a) for a in v) for v in data["vertices"])
        return cls(verts, labels, data.get("name", ""))


@dataclass(frozen=True)
class HPolytope:
    """``{x : A x <= b, E x = f}``.

    ``ambient`` names the space the rows live in (for instance ``"RMET(susp G)"``)
    so that polytopes over ``G`` and over its suspension are not confused.
    """

    A: tuple
    b: tuple
    eq_A: tuple = ()
    eq_b: tuple = ()
    labels: tuple | None = None
    ambient: str = ""
    dim: int | None = field(default=None, compare=False)

    def __post_init__(self):
        A = tuple(tuple(to_number(a) for a in row) for row in self.A)
        b = tuple(to_number(v) for v in self.b)
        E = tuple(tuple(to_number(a) for a in row) for row in self.eq_A)
        f = tuple(to_number(v) for v in self.eq_b)
        if len(A) != len(b) or len(E) != len(f):
            raise DomainError("row count and right-hand side length differ")
        d = self.dim
        if d is None:
            if A:
                d = len(A[0])
            elif E:
                d = len(E[0])
            elif self.labels is not None:
                d = len(self.labels)
            else:
                raise DomainError("cannot infer the dimension of an empty system")
        for row in A + E:
            if len(row) != d:
                raise DomainError("coefficient rows must all have the ambient dimension")
            if all(a == 0 for a in row):
                raise DomainError("zero coefficient row")
        if self.labels is not None and len(self.labels) != d:
            raise DomainError("one label per coordinate")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "eq_A", E)
        object.__setattr__(self, "eq_b", f)
        object.__setattr__(self, "dim", d)

    @property
    def dimension(self) -> int:
        return self.dim

    def slacks(self, x: Sequence) -> list:
        """``b - A x`` for every inequality row."""
        if len(x) != self.dim:
            raise DomainError("point dimension does not match")
        return [bi - sum(a * xi for a, xi in zip(row, x) if a) for row, bi in zip(self.A, self.b)]

    def max_violation(self, x: Sequence):
        """Largest amount by which any row (equalities in both directions) fails."""
        worst = 0
        for s in self.slacks(x):
            if -s > worst:
                worst = -s
        for row, fi in zip(self.eq_A, self.eq_b):
            r = abs(sum(a * xi for a, xi in zip(row, x)) - fi)
            if r > worst:
                worst = r
        return worst

    def contains(self, x: Sequence, tol: float = 0.0) -> bool:
        """Membership test; exact for rational ``x`` with ``tol == 0``."""
        pts = [to_number(v) for v in x]
        return self.max_violation(pts) <= tol

    def violated_rows(self, x: Sequence, tol: float = 0.0) -> list:
        return [i for i, s in enumerate(self.slacks([to_number(v) for v in x])) if -s > tol]

    def to_json(self) -> dict:
        return {
            "type": "hpolytope",
            "ambient": self.ambient,
            "dimension": self.dim,
            "labels": list(self.labels) if self.labels else None,
            "rows": [{"a": [number_to_json(a) for a in row], "b": number_to_json(bi)}
                     for row, bi in zip(self.A, self.b)],
            "equalities": [{"a": [number_to_json(a) for a in row], "b": number_to_json(fi)}
                           for row, fi in zip(self.eq_A, self.eq_b)],
        }

    @classmethod
    def from_json(cls, data: dict) -> "HPolytope":
        rows = data.get("rows", [])
        eqs = data.get("equalities", [])
        return cls(tuple(tuple(r["a"]) for r in rows), tuple(r["b"] for r in rows),
                   tuple(tuple(r["a"]) for r in eqs), tuple(r["b"] for r in eqs),
                   tuple(data["labels"]) if data.get("labels") else None,
                   data.get("ambient", ""), data.get("dimension"))


# --- labels -------------------------------------------------------------------

def correlation_labels(G: Graph) -> tuple:
    return tuple(f"q{i}" for i in range(G.n)) + tuple(f"q{i},{j}" for i, j in G.edges)


def expectation_labels(G: Graph) -> tuple:
    return tuple(f"x_e{i}" for i in range(G.n)) + tuple(f"x{i},{j}" for i, j in G.edges)


def edge_labels(G: Graph, prefix: str = "x") -> tuple:
    return tuple(f"{prefix}{i},{j}" for i, j in G.edges)


def _check_cap(G: Graph, cap: int):
    if 2 ** G.n > cap:
        raise ResourceLimitError(f"2^{G.n} labelings exceed the cap of {cap}")


# --- vertex representations -----------------------------------------------------

def correlation_polytope(G: Graph, cap: int = DEFAULT_CAP) -> VPolytope:
    """COR(G): one vertex per vertex subset S, with S enumerated lexicographically
    as a 0/1 indicator vector (so the empty set comes first)."""
    _check_cap(G, cap)
    verts = []
    for c in product((0, 1), repeat=G.n):
        verts.append(tuple(c) + tuple(c[i] * c[j] for i, j in G.edges))
    return VPolytope(tuple(verts), correlation_labels(G), "COR")


def cut_polytope(G: Graph, convention: str = "pm1", cap: int = DEFAULT_CAP) -> VPolytope:
    """Cut vectors of ``G`` over its edge list.

    ``pm1``: ``x_ij = c_i c_j`` for ``c`` in {+1,-1}^V.  ``01``: ``y_ij = c_i xor c_j``
    for ``c`` in {0,1}^V, the image of the ``pm1`` cuts under :func:`alpha`.
    Labelings giving the same vector are merged, keeping the first one in
    lexicographic order.
    """
    _check_cap(G, cap)
    seen = {}
    if convention == "pm1":
        for c in product((1, -1), repeat=G.n):
            seen.setdefault(tuple(c[i] * c[j] for i, j in G.edges), None)
        return VPolytope(tuple(seen), edge_labels(G, "x"), "CUT_pm1")
    if convention == "01":
        for c in product((0, 1), repeat=G.n):
            seen.setdefault(tuple(c[i] ^ c[j] for i, j in G.edges), None)
        return VPolytope(tuple(seen), edge_labels(G, "y"), "CUT_01")
    raise DomainError("convention must be 'pm1' or '01'")


# --- coordinate maps ------------------------------------------------------------

def _edge_contexts(scenario: CompatibilityScenario, G: Graph) -> dict:
    out = {}
    for k, c in enumerate(scenario.contexts):
        if len(c) == 2:
            out[(c[0], c[1])] = k
    for e in G.edges:
        if e not in out:
            raise DomainError(f"edge {e} is not a context of the scenario")
    return out


def _two_outcome_graph(scenario: CompatibilityScenario, G: Graph | None) -> Graph:
    if scenario.num_outcomes != 2:
        raise DomainError("this map needs exactly two outcomes")
    if any(len(c) > 2 for c in scenario.contexts):
        raise DomainError("this map needs contexts of size at most two")
    if G is None:
        G = Graph(len(scenario.measurements),
                  tuple(c for c in scenario.contexts if len(c) == 2))
    if G.n != len(scenario.measurements):
        raise DomainError("graph and scenario disagree on the number of measurements")
    return G


def phi(B: Behavior, G: Graph | None = None) -> tuple:
    """Correlation vector ``q``: ``q_i = p_i(o1)``, ``q_ij = p_ij(o1, o1)``.

    ``o1`` is the second outcome label (``-1`` for the outcome set ``(+1, -1)``).
    ``G`` defaults to the graph whose edges are the two-element contexts.
    """
    sc = B.scenario
    G = _two_outcome_graph(sc, G)
    if check_nondisturbance(B):
        raise DomainError("phi needs a non-disturbing behavior")
    o0, o1 = sc.outcomes
    q = []
    for i in range(G.n):
        k = next(k for k, c in enumerate(sc.contexts) if i in c)
        c = sc.contexts[k]
        if len(c) == 1:
            q.append(B.p(k, (o1,)))
        elif c[0] == i:
            q.append(B.p(k, (o1, o0)) + B.p(k, (o1, o1)))
        else:
            q.append(B.p(k, (o0, o1)) + B.p(k, (o1, o1)))
    ectx = _edge_contexts(sc, G)
    for e in G.edges:
        q.append(B.p(ectx[e], (o1, o1)))
    return tuple(q)


def phi_inverse(q: Sequence, scenario: CompatibilityScenario, G: Graph | None = None) -> Behavior:
    """Behavior with correlation vector ``q``."""
    G = _two_outcome_graph(scenario, G)
    if len(q) != G.n + len(G.edges):
        raise DomainError(f"expected {G.n + len(G.edges)} coordinates")
    q = [to_number(v) for v in q]
    qe = {e: q[G.n + t] for t, e in enumerate(G.edges)}
    rows = []
    for c in scenario.contexts:
        if len(c) == 1:
            qi = q[c[0]]
            rows.append((1 - qi, qi))
        else:
            i, j = c
            qi, qj, qij = q[i], q[j], qe[(i, j)]
            # order: (o0,o0), (o0,o1), (o1,o0), (o1,o1)
            rows.append((1 - qi - qj + qij, qj - qij, qi - qij, qij))
    return Behavior(scenario, tuple(rows))


def psi(q: Sequence, G: Graph) -> tuple:
    """Expectation vector: ``x_ei = 1 - 2 q_i``, ``x_ij = 1 - 2q_i - 2q_j + 4q_ij``."""
    if len(q) != G.n + len(G.edges):
        raise DomainError(f"expected {G.n + len(G.edges)} coordinates")
    q = [to_number(v) for v in q]
    x = [1 - 2 * q[i] for i in range(G.n)]
    for t, (i, j) in enumerate(G.edges):
        x.append(1 - 2 * q[i] - 2 * q[j] + 4 * q[G.n + t])
    return tuple(x)


def psi_inverse(x: Sequence, G: Graph) -> tuple:
    if len(x) != G.n + len(G.edges):
        raise DomainError(f"expected {G.n + len(G.edges)} coordinates")
    x = [to_number(v) for v in x]
    half = Fraction(1, 2) if is_exact(x) else 0.5
    quarter = Fraction(1, 4) if is_exact(x) else 0.25
    q = [(1 - x[i]) * half for i in range(G.n)]
    for t, (i, j) in enumerate(G.edges):
        q.append((x[G.n + t] - x[i] - x[j] + 1) * quarter)
    return tuple(q)


def alpha(x: Sequence) -> tuple:
    """±1 cut coordinates to 0/1 cut coordinates: ``y = (1 - x) / 2``."""
    x = [to_number(v) for v in x]
    half = Fraction(1, 2) if is_exact(x) else 0.5
    return tuple((1 - v) * half for v in x)


def alpha_inverse(y: Sequence) -> tuple:
    """0/1 cut coordinates to ±1 cut coordinates: ``x = 1 - 2y``."""
    return tuple(1 - 2 * to_number(v) for v in y)


def project_pi(x: Sequence, G: Graph) -> tuple:
    """Drop the ``x_e`` block, keeping the edge correlators of ``G``."""
    if len(x) != G.n + len(G.edges):
        raise DomainError(f"expected {G.n + len(G.edges)} coordinates")
    return tuple(x[G.n:])


def expectation_vector(B: Behavior, G: Graph | None = None) -> tuple:
    """``psi(phi(B))`` for a two-outcome behavior."""
    G = _two_outcome_graph(B.scenario, G)
    return psi(phi(B, G), G)


# --- H-representations ----------------------------------------------------------

def _edges_in_triangles(G: Graph) -> set:
    adj = G.adjacency
    return {(i, j) for i, j in G.edges if adj[i] & adj[j]}


def cycle_inequalities(G: Graph) -> tuple:
    """Rows ``y(F) - y(C \\ F) <= |F| - 1`` for chordless cycles ``C`` and odd ``F``.

    Returned as ``(A, b)`` over the edge coordinates of ``G``.
    """
    A, b = [], []
    m = len(G.edges)
    for cyc in chordless_cycles(G):
        idx = cycle_edge_indices(G, cyc)
        k = len(idx)
        for r in range(1, k + 1, 2):
            for F in combinations(range(k), r):
                row = [0] * m
                for t in range(k):
                    row[idx[t]] = -1
                for t in F:
                    row[idx[t]] = 1
                A.append(tuple(row))
                b.append(r - 1)
    return A, b


def met_hrep(G: Graph) -> HPolytope:
    """Semimetric polytope MET(G) in 0/1 cut coordinates, facet rows only.

    Cycle rows come from chordless cycles; edges lying in no triangle also get
    the bounds ``0 <= y_e <= 1`` (both are needed: without the lower bound the
    system admits points with negative coordinates).
    """
    A, b = cycle_inequalities(G)
    m = len(G.edges)
    tri = _edges_in_triangles(G)
    for t, e in enumerate(G.edges):
        if e in tri:
            continue
        row = [0] * m
        row[t] = 1
        A.append(tuple(row))
        b.append(1)
        row = [0] * m
        row[t] = -1
        A.append(tuple(row))
        b.append(0)
    return HPolytope(tuple(A), tuple(b), labels=edge_labels(G, "y"), ambient="MET", dim=m)


def hrep_01_to_pm1(H: HPolytope) -> HPolytope:
    """Rewrite rows over 0/1 cut coordinates in ±1 coordinates (``y = (1-x)/2``)."""
    A, b = [], []
    for row, bi in zip(H.A, H.b):
        # a.(1-x)/2 <= b  <=>  -a.x <= 2b - sum(a)
        A.append(tuple(-a for a in row))
        b.append(2 * bi - sum(row))
    labels = tuple(lbl.replace("y", "x", 1) for lbl in H.labels) if H.labels else None
    return HPolytope(tuple(A), tuple(b), labels=labels, ambient=H.ambient + "_pm1", dim=H.dim)


def cut_hrep(G: Graph, convention: str = "pm1") -> HPolytope:
    """H-representation of CUT(G) for graphs without a K5 minor."""
    if not cut_equals_met_guard(G):
        raise UnsupportedGraphError("G has a K5 minor; cycle inequalities do not describe CUT(G)")
    H = met_hrep(G)
    if convention == "01":
        return H
    if convention == "pm1":
        return hrep_01_to_pm1(H)
    raise DomainError("convention must be 'pm1' or '01'")


def rcmet_hrep(G: Graph) -> HPolytope:
    """Rooted correlation semimetric polytope over ``(q_i, q_ij)``.

    Per edge the four rows say that every entry of the recovered 2x2
    distribution is nonnegative: ``q_ij >= 0``, ``q_i - q_ij >= 0``,
    ``q_j - q_ij >= 0``, ``1 - q_i - q_j + q_ij >= 0``.  Isolated vertices get
    ``0 <= q_i <= 1``.
    """
    n, m = G.n, len(G.edges)
    d = n + m
    A, b = [], []
    for t, (i, j) in enumerate(G.edges):
        e = n + t
        row = [0] * d
        row[e] = -1
        A.append(row)
        b.append(0)
        for v in (i, j):
            row = [0] * d
            row[v] = -1
            row[e] = 1
            A.append(row)
            b.append(0)
        row = [0] * d
        row[i] = 1
        row[j] = 1
        row[e] = -1
        A.append(row)
        b.append(1)
    touched = {v for e in G.edges for v in e}
    for v in range(n):
        if v in touched:
            continue
        row = [0] * d
        row[v] = 1
        A.append(row)
        b.append(1)
        row = [0] * d
        row[v] = -1
        A.append(row)
        b.append(0)
    return HPolytope(tuple(map(tuple, A)), tuple(b), labels=correlation_labels(G),
                     ambient="RCMET", dim=d)


def pullback(H: HPolytope, T: Sequence, t: Sequence, labels=None, ambient: str = "") -> HPolytope:
    """``{x : T x + t in H}`` for an affine map given by matrix ``T`` and offset ``t``."""
    T = [[to_number(a) for a in row] for row in T]
    t = [to_number(v) for v in t]
    dim = len(T[0])
    A, b = [], []
    for row, bi in zip(H.A, H.b):
        A.append(tuple(sum(row[r] * T[r][c] for r in range(len(row)) if row[r]) for c in range(dim)))
        b.append(bi - sum(row[r] * t[r] for r in range(len(row)) if row[r]))
    return HPolytope(tuple(A), tuple(b), labels=labels, ambient=ambient, dim=dim)


def rmet_hrep(G: Graph) -> HPolytope:
    """RMET in the expectation coordinates of the suspension of ``G``.

    This is the image of :func:`rcmet_hrep` under :func:`psi`; its ambient
    graph is the suspension, whose edge list is ``x_e`` block then ``G``'s edges.
    """
    n, m = G.n, len(G.edges)
    d = n + m
    q = Fraction(1, 4)
    h = Fraction(1, 2)
    T = [[Fraction(0)] * d for _ in range(d)]
    off = [Fraction(0)] * d
    for i in range(n):
        T[i][i] = -h
        off[i] = h
    for t, (i, j) in enumerate(G.edges):
        r = n + t
        T[r][r] = q
        T[r][i] = -q
        T[r][j] = -q
        off[r] = q
    return pullback(rcmet_hrep(G), T, off, labels=expectation_labels(G), ambient="RMET(suspension)")


def cut_equals_met_guard(G: Graph) -> bool:
    """True when the cycle inequalities describe CUT(G), i.e. G has no K5 minor."""
    if G.n < 5 or len(G.edges) < 10:
        return True
    return not has_minor(G, named_graph("complete", 5))


def ncycle_facets_pm1(n: int) -> HPolytope:
    """The ``2^(n-1)`` cycle facets of CUT±1(C_n) over the cyclic edge order.

    Each row has ``±1`` coefficients with an odd number of ``-1`` entries and
    bound ``n - 2``.
    """
    if n < 3:
        raise DomainError("n-cycle needs n >= 3")
    A = []
    for signs in product((1, -1), repeat=n):
        if signs.count(-1) % 2 == 1:
            A.append(signs)
    C = named_graph("cycle", n)
    return HPolytope(tuple(A), tuple([n - 2] * len(A)), labels=edge_labels(C, "x"),
                     ambient="CUT_pm1(C_n)", dim=n)


def ncycle_facets_suspension(n: int) -> HPolytope:
    """The cycle facets lifted to the coordinates of the suspension of C_n (zero on the x_e block)."""
    F = ncycle_facets_pm1(n)
    A = tuple((0,) * n + row for row in F.A)
    return HPolytope(A, F.b, labels=expectation_labels(named_graph("cycle", n)),
                     ambient="CUT_pm1(suspension C_n)", dim=2 * n)


# --- elliptope ------------------------------------------------------------------

def elliptope_membership_k4free(G: Graph, z: Sequence, tol: float = ELLIPTOPE_TOL) -> bool:
    """Whether ``z`` lies in the elliptope of a graph without a K4 minor.

    For such graphs ``z`` belongs to the elliptope iff ``arccos(z)/pi`` lies in
    CUT01(G), which the cycle inequalities describe exactly.
    """
    if len(z) != len(G.edges):
        raise DomainError("z needs one entry per edge")
    if G.n >= 4 and has_minor(G, named_graph("complete", 4)):
        raise UnsupportedGraphError("G has a K4 minor")
    zs = [float(v) for v in z]
    if any(v < -1 - tol or v > 1 + tol for v in zs):
        return False
    y = [math.acos(max(-1.0, min(1.0, v))) / math.pi for v in zs]
    return met_hrep(G).contains(y, tol)


def elliptope_extremal_point(n: int) -> tuple:
    """Edge vector of C_n from unit vectors at angles ``k*pi/n``.

    Consecutive vectors meet at angle ``pi/n``; the closing edge ``(0, n-1)``
    at angle ``(n-1)pi/n``.  So ``z = (cos(pi/n), ..., cos(pi/n), -cos(pi/n))``.
    """
    if n < 3 or n % 2 == 0:
        raise DomainError("n must be odd and at least 3")
    angles = [k * math.pi / n for k in range(n)]
    C = named_graph("cycle", n)
    return tuple(math.cos(angles[j] - angles[i]) for i, j in C.edges)


def ncycle_functional(x_edges: Sequence) -> object:
    """``sum of the first n-1 cyclic edge coordinates minus the closing one``."""
    return sum(x_edges[:-1]) - x_edges[-1]


def suspension_cut_polytope(G: Graph, cap: int = DEFAULT_CAP) -> VPolytope:
    """CUT±1 of the suspension, labelled in expectation coordinates."""
    P = cut_polytope(suspension(G), "pm1", cap)
    return VPolytope(P.vertices, expectation_labels(G), "CUT_pm1(suspension)")
