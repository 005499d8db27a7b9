"""Exclusivity-graph scenarios.

Events are the vertices of a graph and edges join exclusive events.  A
behavior assigns a probability to every event with ``p_i + p_j <= 1`` on
edges.  The classical behaviors form the stable-set polytope STAB(G), the
quantum ones the theta body, and the behaviors obeying the exclusivity
principle on cliques the polytope QSTAB(G).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from ._numeric import is_exact, to_number
from .errors import DomainError, ValidationError
from .graphs import Graph, graph_automorphisms, independent_sets, is_automorphism, maximal_cliques, named_graph
from .polytopes import HPolytope, VPolytope
from .quantifiers import NORMS, QuantifierReport, hull_distance, norm_scale
from .solvers.hull import membership_in_vpolytope
from .solvers.invariants import fractional_packing, independence_number
from .solvers.lp import LPProblem, solve_lp
from .solvers.sdp import lovasz_theta

MAX_STAB_VERTICES = 30
SANDWICH_TOL = 1e-6
CLOSED_FORM_TOL = 1e-5


@dataclass(frozen=True)
class ExclusivityScenario:
    graph: Graph
    labels: tuple | None = None

    def __post_init__(self):
        if self.labels is not None:
            labels = tuple(str(x) for x in self.labels)
            if len(labels) != self.graph.n:
                raise ValidationError("one label per event is required")
            object.__setattr__(self, "labels", labels)

    @property
    def n(self) -> int:
        return self.graph.n


@dataclass(frozen=True)
class EventProbabilityVector:
    """Probabilities of the events of an exclusivity scenario."""

    scenario: ExclusivityScenario
    p: tuple

    def __post_init__(self):
        G = self.scenario.graph
        vals = tuple(to_number(v) for v in self.p)
        if len(vals) != G.n:
            raise ValidationError(f"expected {G.n} event probabilities, got {len(vals)}")
        exact = is_exact(vals)
        if not exact:
            vals = tuple(float(v) for v in vals)
        tol = 0 if exact else 1e-9
        for i, v in enumerate(vals):
            if v < -tol or v > 1 + tol:
                raise ValidationError(f"event {i} has probability {float(v):.12g} outside [0, 1]")
        for i, j in G.edges:
            if vals[i] + vals[j] > 1 + tol:
                raise ValidationError(f"exclusive events {i} and {j} have total probability "
                                      f"{float(vals[i] + vals[j]):.12g} > 1")
        object.__setattr__(self, "p", vals)

    @property
    def exact(self) -> bool:
        return is_exact(self.p)

    @classmethod
    def on(cls, G: Graph, p: Sequence) -> "EventProbabilityVector":
        return cls(ExclusivityScenario(G), tuple(p))


def _as_vector(data, G: Graph | None = None) -> EventProbabilityVector:
    if isinstance(data, EventProbabilityVector):
        return data
    if G is None:
        raise DomainError("a graph is needed for a plain probability vector")
    return EventProbabilityVector.on(G, data)


# --- polytopes ----------------------------------------------------------------------

def stab_vertices(G: Graph) -> VPolytope:
    """Indicator vectors of all independent sets, the empty set included."""
    if G.n > MAX_STAB_VERTICES:
        raise DomainError(f"stable-set enumeration is limited to {MAX_STAB_VERTICES} vertices")
    verts = []
    for S in independent_sets(G):
        v = [0] * G.n
        for i in S:
            v[i] = 1
        verts.append(tuple(v))
    return VPolytope(tuple(verts), tuple(f"p{i}" for i in range(G.n)), "STAB")


def qstab_hrep(G: Graph) -> HPolytope:
    """One row ``sum_{i in Q} p_i <= 1`` per maximal clique, then ``-p_i <= 0``."""
    A, b = [], []
    for Q in maximal_cliques(G):
        row = [0] * G.n
        for i in Q:
            row[i] = 1
        A.append(tuple(row))
        b.append(1)
    for i in range(G.n):
        row = [0] * G.n
        row[i] = -1
        A.append(tuple(row))
        b.append(0)
    return HPolytope(tuple(A), tuple(b), labels=tuple(f"p{i}" for i in range(G.n)),
                     ambient="QSTAB")


def in_stab(data, G: Graph | None = None):
    """Membership of ``p`` in STAB(G) with weights or a separating hyperplane."""
    v = _as_vector(data, G)
    return membership_in_vpolytope(v.p, stab_vertices(v.scenario.graph), exact=v.exact)


def in_qstab(data, G: Graph | None = None) -> bool:
    v = _as_vector(data, G)
    return qstab_hrep(v.scenario.graph).contains(v.p, 0 if v.exact else 1e-9)


def theta_body_exclusion(data, G: Graph | None = None, weightings: Sequence | None = None) -> dict | None:
    """One-sided certificate that ``p`` lies outside the theta body.

    Tries each weighting ``gamma`` (default: unit weights) and returns the first
    with ``gamma . p > theta(G, gamma)``, or ``None`` when none separates.  A
    ``None`` result does not certify membership.
    """
    v = _as_vector(data, G)
    G = v.scenario.graph
    for gamma in (weightings or [[1] * G.n]):
        th = lovasz_theta(G, gamma)
        lhs = sum(float(g) * float(x) for g, x in zip(gamma, v.p))
        if lhs > th.upper + 1e-9:
            return {"weights": tuple(gamma), "value": lhs, "theta_upper": th.upper}
    return None


# --- quantifiers --------------------------------------------------------------------

def _stab_list(G: Graph) -> list:
    return list(stab_vertices(G).vertices)


def exclusivity_distance(data, norm: str = "l1", G: Graph | None = None) -> QuantifierReport:
    """``(1/|V|)`` times the ``norm`` distance from ``p`` to STAB(G); the bare distance is ``raw``."""
    if norm not in NORMS:
        raise DomainError(f"norm must be one of {NORMS}")
    v = _as_vector(data, G)
    G = v.scenario.graph
    mem = in_stab(v)
    name = f"D^excl[{norm}]"
    if mem.inside:
        zero = Fraction(0) if v.exact else 0.0
        return QuantifierReport(name, zero, {"stab_weights": mem.weights},
                                {"raw": zero, "normalized": zero, "method": "classical"})
    res = hull_distance(v.p, _stab_list(G), None, norm, "D", v.exact and norm != "l2")
    raw = res["value"]
    diag = {k: x for k, x in res.items() if k not in ("value", "nearest", "weights")}
    diag.update({"raw": raw, "normalized": raw / G.n, "separating_hyperplane": mem.hyperplane})
    return QuantifierReport(name, raw / G.n, {"nearest_classical": res["nearest"],
                                              "stab_weights": res["weights"]}, diag)


def exclusivity_contextual_fraction(data, G: Graph | None = None) -> QuantifierReport:
    """Least ``lam`` with ``p = (1 - lam) c + lam e``, ``c`` in STAB and ``e`` obeying ``e_i + e_j <= 1``.

    Written with ``b = (1 - lam) * weights`` and ``r = lam * e``:
    ``p = V b + r``, ``1.b = 1 - lam``, ``r >= 0``, ``r_i <= lam`` and
    ``r_i + r_j <= lam`` on edges.
    """
    v = _as_vector(data, G)
    G = v.scenario.graph
    V = _stab_list(G)
    m, n = len(V), G.n
    # variables: b (m), r (n), lam
    nv = m + n + 1
    A, rel, rhs = [], [], []
    for i in range(n):
        row = [0] * nv
        for j in range(m):
            row[j] = V[j][i]
        row[m + i] = 1
        A.append(row)
        rel.append("=")
        rhs.append(v.p[i])
    row = [1] * m + [0] * n + [1]
    A.append(row)
    rel.append("=")
    rhs.append(1)
    for i in range(n):
        row = [0] * nv
        row[m + i] = 1
        row[-1] = -1
        A.append(row)
        rel.append("<=")
        rhs.append(0)
    for i, j in G.edges:
        row = [0] * nv
        row[m + i] = row[m + j] = 1
        row[-1] = -1
        A.append(row)
        rel.append("<=")
        rhs.append(0)
    c = [0] * (nv - 1) + [1]
    sol = solve_lp(LPProblem(c, A, rel, rhs), exact=v.exact)
    if not sol.optimal:
        raise DomainError(f"contextual fraction LP ended with status {sol.status}")
    value = sol.objective if v.exact else max(0.0, float(sol.objective))
    return QuantifierReport("CF^excl", value, {"stab_part": sol.x[:m], "residual": sol.x[m:m + n]},
                            {"method": "lp", "iterations": sol.iterations, "exact": sol.exact})


def exclusivity_robustness(data, G: Graph | None = None) -> QuantifierReport:
    """Least ``w`` with ``(1 - w) p + w c`` in STAB for some ``c`` in STAB."""
    v = _as_vector(data, G)
    G = v.scenario.graph
    V = _stab_list(G)
    m, n = len(V), G.n
    # variables: b (m), c (m), w;  V b - V c + w p = p, 1.b = 1, 1.c - w = 0
    A = []
    for i in range(n):
        A.append([V[j][i] for j in range(m)] + [-V[j][i] for j in range(m)] + [v.p[i]])
    A.append([1] * m + [0] * m + [0])
    A.append([0] * m + [1] * m + [-1])
    sol = solve_lp(LPProblem([0] * (2 * m) + [1], A, ["="] * (n + 2), list(v.p) + [1, 0]),
                   exact=v.exact)
    if not sol.optimal:
        raise DomainError(f"robustness LP ended with status {sol.status}")
    value = sol.objective if v.exact else max(0.0, float(sol.objective))
    return QuantifierReport("R^excl", value, {"mixture_weights": sol.x[:m],
                                              "noise_weights": sol.x[m:2 * m]},
                            {"method": "lp", "iterations": sol.iterations, "exact": sol.exact})


def exclusivity_quantifiers(data, variant: str = "D", norm: str = "l1",
                            G: Graph | None = None) -> QuantifierReport:
    """Dispatch: ``variant`` is ``"D"`` (with ``norm``), ``"CF"`` or ``"R"``."""
    if variant == "D":
        return exclusivity_distance(data, norm, G)
    if variant == "CF":
        return exclusivity_contextual_fraction(data, G)
    if variant == "R":
        return exclusivity_robustness(data, G)
    raise DomainError("variant must be 'D', 'CF' or 'R'")


# --- operations ---------------------------------------------------------------------

def relabeling(data, perm: Sequence[int], G: Graph | None = None) -> EventProbabilityVector:
    """``T(p)_i = p_{perm[i]}`` for an automorphism ``perm`` of the exclusivity graph."""
    v = _as_vector(data, G)
    G = v.scenario.graph
    if not is_automorphism(G, perm):
        raise DomainError("relabeling needs an automorphism of the exclusivity graph")
    return EventProbabilityVector(v.scenario, tuple(v.p[perm[i]] for i in range(G.n)))


def automorphisms(G: Graph) -> list:
    return graph_automorphisms(G)


# --- invariants ---------------------------------------------------------------------

@dataclass
class CSWBounds:
    classical: object
    quantum: float
    eprinciple: object
    certificates: dict = field(default_factory=dict)

    def as_tuple(self) -> tuple:
        return (self.classical, self.quantum, self.eprinciple)


def csw_bounds(G: Graph, weights: Sequence | None = None) -> CSWBounds:
    """Classical, quantum and exclusivity-principle bounds on ``sum gamma_i p_i``.

    These are the weighted independence number, the Lovász number and the
    fractional packing number.  Their ordering is checked (to 1e-6).
    """
    w = tuple(to_number(x) for x in weights) if weights is not None else G.vertex_weights()
    a = independence_number(G, w)
    th = lovasz_theta(G, w)
    fp = fractional_packing(G, w)
    if not (float(a.value) <= th.value + SANDWICH_TOL and th.value <= float(fp.value) + SANDWICH_TOL):
        raise DomainError(f"sandwich violated: {a.value} <= {th.value} <= {fp.value}")
    return CSWBounds(a.value, th.value, fp.value,
                     {"independent_set": a.witness, "theta_matrix": th.X,
                      "theta_bracket": (th.lower, th.upper), "packing_point": fp.point,
                      "cliques": fp.cliques})


def odd_cycle_theta(n: int) -> float:
    c = math.cos(math.pi / n)
    return n * c / (1 + c)


def exclusivity_closed_form(data, norm: str = "l1", G: Graph | None = None) -> dict:
    """Closed-form distance to STAB(C_n), n odd, for ``p`` violating only ``sum p <= (n-1)/2``.

    ``raw = (sum p - (n-1)/2) / n^(1/q)`` with ``q`` dual to the norm; ``value``
    divides by ``n``.  Returns zeros when the sum is within the bound.
    """
    v = _as_vector(data, G)
    n = v.scenario.n
    excess = sum(v.p) - Fraction(n - 1, 2)
    if excess <= 0:
        return {"value": 0.0, "raw": 0.0, "excess": excess}
    raw = float(excess) / norm_scale(n, norm)
    return {"value": raw / n, "raw": raw, "excess": excess}


def ncycle_exclusivity_report(n: int) -> dict:
    """Bounds and maximal distances for the odd n-cycle exclusivity graph.

    Solver values for alpha, theta and alpha* are set beside the closed forms
    ``(n-1)/2``, ``n cos(pi/n) / (1 + cos(pi/n))`` and ``n/2``; any
    disagreement beyond 1e-5 is listed under ``"disagreements"``.  Per norm,
    the largest distance to STAB attained by quantum behaviors is
    ``(theta - alpha) / n^(1/q)`` and by exclusivity-principle behaviors
    ``(alpha* - alpha) / n^(1/q)``.
    """
    if n < 5 or n % 2 == 0:
        raise DomainError("the exclusivity n-cycle needs odd n >= 5")
    G = named_graph("cycle", n)
    b = csw_bounds(G)
    closed = {"alpha": Fraction(n - 1, 2), "theta": odd_cycle_theta(n), "alpha_star": Fraction(n, 2)}
    solved = {"alpha": b.classical, "theta": b.quantum, "alpha_star": b.eprinciple}
    bad = [k for k in closed if abs(float(closed[k]) - float(solved[k])) > CLOSED_FORM_TOL]
    table = {}
    for norm in NORMS:
        s = norm_scale(n, norm)
        q_raw = (b.quantum - float(b.classical)) / s
        e_raw = float(b.eprinciple - b.classical) / s
        table[norm] = {"quantum_raw": q_raw, "quantum": q_raw / n,
                       "eprinciple_raw": e_raw, "eprinciple": e_raw / n}
    return {"n": n, "bounds": solved, "closed_forms": closed, "disagreements": bad,
            "max_distances": table}


# --- Fig.-1 fixture -----------------------------------------------------------------

FIG1_EDGES = ((1, 2), (1, 3), (1, 4), (1, 5), (2, 3), (2, 6), (3, 4), (3, 6), (3, 7), (4, 5),
              (4, 7), (4, 8), (5, 8), (6, 7), (6, 8), (7, 8))


@dataclass
class Fig1Fixture:
    graph: Graph
    vector: EventProbabilityVector
    rows: tuple  # ((coefficients, bound), ...)


def fixture_fig1() -> Fig1Fixture:
    """Eight-event graph with the uniform 1/3 vector and two inequality rows.

    Row 1 is ``p4 + p5 + p6 + p7 + p8 <= 1`` and row 2 is
    ``2p1 + p2 + 2p3 + 2p4 + p5 + p6 + p7 + p8 <= 3`` (events numbered from 1).
    On this graph row 1 is not valid for STAB: events 5 and 6 are not
    exclusive, so the independent set {5, 6} gives 2.  Row 2 is valid and
    tight.  See :func:`row_maximum`.
    """
    G = Graph(8, tuple((i - 1, j - 1) for i, j in FIG1_EDGES))
    third = Fraction(1, 3)
    v = EventProbabilityVector.on(G, [third] * 8)
    rows = (((0, 0, 0, 1, 1, 1, 1, 1), 1), ((2, 1, 2, 2, 1, 1, 1, 1), 3))
    return Fig1Fixture(G, v, rows)


def row_maximum(G: Graph, coefficients: Sequence) -> tuple:
    """Largest value of ``coefficients . x`` over STAB(G) with a maximizing stable set."""
    best, arg = None, None
    for S in independent_sets(G):
        val = sum(coefficients[i] for i in S)
        if best is None or val > best:
            best, arg = val, S
    return best, arg


def evaluate_row(coefficients: Sequence, p: Sequence):
    return sum(to_number(c) * to_number(x) for c, x in zip(coefficients, p))


def stab_separation(data, G: Graph | None = None) -> tuple:
    """Separating hyperplane ``(a, b)`` for ``p`` outside STAB, or ``None``."""
    mem = in_stab(data, G)
    return None if mem.inside else mem.hyperplane


def uniform_vector(G: Graph, value) -> EventProbabilityVector:
    return EventProbabilityVector.on(G, [to_number(value)] * G.n)


def random_eprinciple_vector(G: Graph, rng: np.random.Generator) -> EventProbabilityVector:
    """A random point of QSTAB(G): a random direction scaled onto the clique constraints."""
    x = rng.random(G.n)
    cliques = maximal_cliques(G)
    worst = max(sum(x[i] for i in Q) for Q in cliques) if cliques else float(x.max())
    scale = rng.uniform(0.0, 1.0) ** 0.25 / max(worst, float(x.max()), 1e-12)
    return EventProbabilityVector.on(G, [float(v) * scale for v in x])
