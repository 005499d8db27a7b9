"""Compatibility scenarios, behaviors, marginals and classical vertices."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from itertools import product
from typing import Iterable, Sequence

import numpy as np

from ._numeric import is_exact, to_number
from .errors import DomainError, ResourceLimitError, ValidationError
from .graphs import Graph

ND_TOLERANCE = 1e-9
NORMALIZATION_TOLERANCE = 1e-9
DEFAULT_VERTEX_CAP = 1 << 24


class NormalizationError(ValidationError):
    """A context distribution does not sum to one or has entries outside [0, 1]."""


@dataclass(frozen=True)
class CompatibilityScenario:
    """Measurements, maximal contexts and a common outcome set.

    Contexts are stored as sorted tuples of measurement indices.  The outcome
    strings of a context are ordered lexicographically with respect to the
    order of ``outcomes``, with the lowest measurement index most significant.
    """

    measurements: tuple
    contexts: tuple
    outcomes: tuple

    def __post_init__(self):
        ms = tuple(str(m) for m in self.measurements)
        if len(set(ms)) != len(ms):
            raise ValidationError("measurement names must be distinct")
        object.__setattr__(self, "measurements", ms)
        outs = tuple(self.outcomes)
        if len(outs) < 2:
            raise ValidationError("the outcome set needs at least two elements")
        if len(set(outs)) != len(outs):
            raise ValidationError("outcome labels must be distinct")
        object.__setattr__(self, "outcomes", outs)
        ctxs = []
        for c in self.contexts:
            idx = tuple(sorted(set(int(i) for i in c)))
            if not idx:
                raise ValidationError("contexts must be nonempty")
            if len(idx) != len(tuple(c)):
                raise ValidationError(f"context {tuple(c)} repeats a measurement")
            if idx[0] < 0 or idx[-1] >= len(ms):
                raise ValidationError(f"context {tuple(c)} refers to an unknown measurement")
            ctxs.append(idx)
        if not ctxs:
            raise ValidationError("a scenario needs at least one context")
        if len(set(ctxs)) != len(ctxs):
            raise ValidationError("duplicate context")
        sets = [set(c) for c in ctxs]
        for a in range(len(sets)):
            for b in range(len(sets)):
                if a != b and sets[a] <= sets[b]:
                    raise ValidationError(
                        f"context {ctxs[a]} is contained in {ctxs[b]}; contexts must be maximal")
        covered = set().union(*sets)
        if covered != set(range(len(ms))):
            missing = sorted(set(range(len(ms))) - covered)
            raise ValidationError(f"measurements {missing} belong to no context")
        object.__setattr__(self, "contexts", tuple(ctxs))

    @classmethod
    def from_names(cls, measurements: Sequence, contexts: Iterable[Sequence], outcomes: Sequence):
        """Build a scenario whose contexts are given by measurement names."""
        ms = [str(m) for m in measurements]
        pos = {m: i for i, m in enumerate(ms)}
        try:
            ctxs = [tuple(pos[str(m)] for m in c) for c in contexts]
        except KeyError as exc:
            raise ValidationError(f"unknown measurement {exc.args[0]!r} in context") from None
        return cls(tuple(ms), tuple(ctxs), tuple(outcomes))

    @property
    def num_contexts(self) -> int:
        return len(self.contexts)

    @property
    def num_outcomes(self) -> int:
        return len(self.outcomes)

    @cached_property
    def outcome_index(self) -> dict:
        return {o: i for i, o in enumerate(self.outcomes)}

    def outcome_strings(self, k: int) -> list:
        """Outcome strings of context ``k`` in canonical order."""
        return list(product(self.outcomes, repeat=len(self.contexts[k])))

    @cached_property
    def offsets(self) -> tuple:
        out = [0]
        d = self.num_outcomes
        for c in self.contexts:
            out.append(out[-1] + d ** len(c))
        return tuple(out)

    @property
    def dimension(self) -> int:
        """Length of the flattened probability vector."""
        return self.offsets[-1]

    def local_index(self, k: int, s: Sequence) -> int:
        """Position of outcome string ``s`` within context ``k``."""
        if len(s) != len(self.contexts[k]):
            raise DomainError("outcome string length does not match the context")
        d = self.num_outcomes
        idx = 0
        for o in s:
            idx = idx * d + self.outcome_index[o]
        return idx

    def context_of(self, names_or_indices: Sequence) -> int:
        """Index of the context with the given members (names or indices)."""
        idx = tuple(sorted(self.measurements.index(m) if isinstance(m, str) else int(m)
                           for m in names_or_indices))
        try:
            return self.contexts.index(idx)
        except ValueError:
            raise DomainError(f"{tuple(names_or_indices)} is not a context") from None

    def num_global_assignments(self) -> int:
        return self.num_outcomes ** len(self.measurements)

    def global_assignments(self, cap: int = DEFAULT_VERTEX_CAP) -> list:
        """All global assignments (one outcome per measurement), lexicographic."""
        if self.num_global_assignments() > cap:
            raise ResourceLimitError(
                f"{self.num_global_assignments()} global assignments exceed the cap {cap}")
        return list(product(self.outcomes, repeat=len(self.measurements)))

    def incidence_matrix(self, cap: int = DEFAULT_VERTEX_CAP) -> np.ndarray:
        """0/1 matrix M with M[(C, s), g] = 1 iff the restriction of g to C is s.

        Rows follow the flattened behavior order, columns the lexicographic
        order of global assignments.
        """
        G = self.num_global_assignments()
        if G > cap:
            raise ResourceLimitError(f"{G} global assignments exceed the cap {cap}")
        d = self.num_outcomes
        nm = len(self.measurements)
        g = np.arange(G, dtype=np.int64)
        # digit of measurement m in assignment g (measurement 0 most significant)
        digits = [(g // d ** (nm - 1 - m)) % d for m in range(nm)]
        M = np.zeros((self.dimension, G), dtype=np.int8)
        for k, c in enumerate(self.contexts):
            local = np.zeros(G, dtype=np.int64)
            for m in c:
                local = local * d + digits[m]
            M[self.offsets[k] + local, g] = 1
        return M

    def restriction_table(self) -> np.ndarray:
        """Array R[k, g] = local index of the restriction of assignment g to context k."""
        M = self.incidence_matrix()
        out = np.zeros((self.num_contexts, M.shape[1]), dtype=np.int64)
        for k in range(self.num_contexts):
            block = M[self.offsets[k]:self.offsets[k + 1]]
            out[k] = np.argmax(block, axis=0)
        return out


@dataclass(frozen=True)
class GlobalAssignment:
    """One outcome per measurement."""

    scenario: CompatibilityScenario
    values: tuple

    def __post_init__(self):
        if len(self.values) != len(self.scenario.measurements):
            raise DomainError("a global assignment needs one outcome per measurement")
        for v in self.values:
            if v not in self.scenario.outcome_index:
                raise DomainError(f"unknown outcome {v!r}")

    def restrict(self, k: int) -> tuple:
        return tuple(self.values[m] for m in self.scenario.contexts[k])


@dataclass(frozen=True)
class Behavior:
    """One probability distribution per context.

    ``table[k][i]`` is the probability of the ``i``-th outcome string of
    context ``k`` (see :meth:`CompatibilityScenario.outcome_strings`).
    Entries are ``Fraction`` in exact mode or ``float`` otherwise.
    """

    scenario: CompatibilityScenario
    table: tuple

    def __post_init__(self):
        sc = self.scenario
        if len(self.table) != sc.num_contexts:
            raise ValidationError("behavior table needs one row per context")
        rows = []
        for k, row in enumerate(self.table):
            vals = tuple(to_number(v) for v in row)
            expected = sc.offsets[k + 1] - sc.offsets[k]
            if len(vals) != expected:
                raise ValidationError(f"context {k} needs {expected} probabilities, got {len(vals)}")
            rows.append(vals)
        exact = all(is_exact(r) for r in rows)
        if not exact:
            rows = [tuple(float(v) for v in r) for r in rows]
        tol = 0 if exact else NORMALIZATION_TOLERANCE
        for k, r in enumerate(rows):
            lo = min(r)
            hi = max(r)
            if lo < -tol or hi > 1 + tol:
                raise NormalizationError(f"context {k} has a probability outside [0, 1]")
            total = sum(r)
            if abs(total - 1) > tol:
                raise NormalizationError(f"context {k} sums to {float(total):.12g}, not 1")
        object.__setattr__(self, "table", tuple(rows))

    @property
    def exact(self) -> bool:
        return bool(self.table) and isinstance(self.table[0][0], Fraction)

    def p(self, k: int, s: Sequence) -> object:
        return self.table[k][self.scenario.local_index(k, s)]

    def flatten(self) -> tuple:
        """The vector P_B: context-major, canonical outcome order within a context."""
        return tuple(v for row in self.table for v in row)

    @classmethod
    def from_flat(cls, scenario: CompatibilityScenario, vec: Sequence) -> "Behavior":
        off = scenario.offsets
        if len(vec) != off[-1]:
            raise ValidationError(f"expected a vector of length {off[-1]}")
        rows = [tuple(vec[off[k]:off[k + 1]]) for k in range(scenario.num_contexts)]
        return cls(scenario, tuple(rows))

    @classmethod
    def from_function(cls, scenario: CompatibilityScenario, fn) -> "Behavior":
        """Build from ``fn(k, s)`` giving the probability of string ``s`` in context ``k``."""
        rows = [tuple(fn(k, s) for s in scenario.outcome_strings(k))
                for k in range(scenario.num_contexts)]
        return cls(scenario, tuple(rows))

    def as_array(self) -> np.ndarray:
        return np.array([float(v) for v in self.flatten()])

    def to_float(self) -> "Behavior":
        return Behavior(self.scenario, tuple(tuple(float(v) for v in r) for r in self.table))


def restrict(s: Sequence, C: Sequence, U: Sequence) -> tuple:
    """Restrict the outcome string ``s`` over ``C`` to the measurements ``U``.

    The result lists outcomes in the order of ``U``.
    """
    if len(s) != len(C):
        raise DomainError("outcome string length does not match the context")
    pos = {m: i for i, m in enumerate(C)}
    missing = [m for m in U if m not in pos]
    if missing:
        raise DomainError(f"{missing} not in the context")
    return tuple(s[pos[m]] for m in U)


@dataclass(frozen=True)
class MarginalTable:
    """Marginal of one context's distribution on a subset ``subset`` of it."""

    context: tuple
    subset: tuple
    distribution: dict

    def __getitem__(self, s):
        return self.distribution[tuple(s)]


def _as_indices(scenario: CompatibilityScenario, members: Sequence) -> tuple:
    return tuple(scenario.measurements.index(m) if isinstance(m, str) else int(m) for m in members)


def marginal(B: Behavior, context, U: Sequence) -> MarginalTable:
    """Marginal distribution ``p^C_U`` of context ``context`` on ``U``.

    ``context`` is a context index or a sequence of measurements; ``U`` is a
    sequence of measurement names or indices.  Strings over ``U`` follow the
    order of ``U``.
    """
    sc = B.scenario
    k = context if isinstance(context, int) else sc.context_of(context)
    C = sc.contexts[k]
    Ui = _as_indices(sc, U)
    if not set(Ui) <= set(C):
        raise DomainError(f"{tuple(U)} is not a subset of context {C}")
    dist = {u: 0 for u in product(sc.outcomes, repeat=len(Ui))}
    for s, p in zip(sc.outcome_strings(k), B.table[k]):
        key = restrict(s, C, Ui)
        dist[key] = dist[key] + p
    return MarginalTable(C, Ui, dist)


@dataclass(frozen=True)
class DisturbanceViolation:
    context_a: tuple
    context_b: tuple
    intersection: tuple
    discrepancy: object


def check_nondisturbance(B: Behavior, tolerance: float | None = None) -> list:
    """Pairs of overlapping contexts whose marginals disagree.

    Exact behaviors are compared exactly; float behaviors with an l-infinity
    tolerance (default 1e-9).
    """
    sc = B.scenario
    if tolerance is None:
        tolerance = 0 if B.exact else ND_TOLERANCE
    out = []
    for a in range(sc.num_contexts):
        for b in range(a + 1, sc.num_contexts):
            inter = tuple(sorted(set(sc.contexts[a]) & set(sc.contexts[b])))
            if not inter:
                continue
            ma = marginal(B, a, inter).distribution
            mb = marginal(B, b, inter).distribution
            gap = max(abs(ma[s] - mb[s]) for s in ma)
            if gap > tolerance:
                out.append(DisturbanceViolation(sc.contexts[a], sc.contexts[b], inter, gap))
    return out


def is_nondisturbing(B: Behavior, tolerance: float | None = None) -> bool:
    return not check_nondisturbance(B, tolerance)


def require_nondisturbing(B: Behavior) -> None:
    bad = check_nondisturbance(B)
    if bad:
        v = bad[0]
        raise DomainError(
            f"behavior is disturbing: contexts {v.context_a} and {v.context_b} disagree "
            f"on {v.intersection} by {float(v.discrepancy):.3g}")


def deterministic_behavior(scenario: CompatibilityScenario, assignment: Sequence) -> Behavior:
    """Point-mass behavior of one global assignment."""
    g = GlobalAssignment(scenario, tuple(assignment))
    rows = []
    for k in range(scenario.num_contexts):
        row = [Fraction(0)] * (scenario.offsets[k + 1] - scenario.offsets[k])
        row[scenario.local_index(k, g.restrict(k))] = Fraction(1)
        rows.append(tuple(row))
    return Behavior(scenario, tuple(rows))


def enumerate_classical_vertices(scenario: CompatibilityScenario,
                                 cap: int = DEFAULT_VERTEX_CAP) -> list:
    """Deterministic behaviors of all global assignments, lexicographic order."""
    return [deterministic_behavior(scenario, g) for g in scenario.global_assignments(cap)]


def behavior_from_global_section(scenario: CompatibilityScenario, weights) -> Behavior:
    """Convex combination of deterministic behaviors.

    ``weights`` is either a sequence aligned with :meth:`global_assignments`
    or a mapping from assignment tuples to weights.
    """
    if isinstance(weights, dict):
        items = [(tuple(g), to_number(w)) for g, w in weights.items()]
    else:
        ws = [to_number(w) for w in weights]
        gs = scenario.global_assignments()
        if len(ws) != len(gs):
            raise DomainError(f"expected {len(gs)} weights, got {len(ws)}")
        items = [(g, w) for g, w in zip(gs, ws) if w != 0]
    if any(w < 0 for _, w in items):
        raise DomainError("global section weights must be nonnegative")
    exact = is_exact([w for _, w in items])
    zero = Fraction(0) if exact else 0.0
    rows = [[zero] * (scenario.offsets[k + 1] - scenario.offsets[k])
            for k in range(scenario.num_contexts)]
    for g, w in items:
        ga = GlobalAssignment(scenario, g)
        for k in range(scenario.num_contexts):
            rows[k][scenario.local_index(k, ga.restrict(k))] += w
    return Behavior(scenario, tuple(tuple(r) for r in rows))


def uniform_behavior(scenario: CompatibilityScenario) -> Behavior:
    rows = []
    for k in range(scenario.num_contexts):
        size = scenario.offsets[k + 1] - scenario.offsets[k]
        rows.append(tuple(Fraction(1, size) for _ in range(size)))
    return Behavior(scenario, tuple(rows))


def compatibility_graph(scenario: CompatibilityScenario) -> Graph:
    """Two-section of the context hypergraph (edges in order of first appearance)."""
    es = []
    seen = set()
    for c in scenario.contexts:
        for a in range(len(c)):
            for b in range(a + 1, len(c)):
                e = (c[a], c[b])
                if e not in seen:
                    seen.add(e)
                    es.append(e)
    return Graph(len(scenario.measurements), tuple(es))


PM = (1, -1)


def scenario_from_graph(G: Graph, names: Sequence | None = None) -> CompatibilityScenario:
    """Two-outcome scenario whose contexts are the edges of ``G`` (in edge order).

    Isolated vertices become single-measurement contexts.  Outcomes are
    ``(+1, -1)`` in that order.
    """
    names = [f"M{i}" for i in range(G.n)] if names is None else list(names)
    ctxs = [e for e in G.edges]
    touched = {v for e in G.edges for v in e}
    ctxs += [(v,) for v in range(G.n) if v not in touched]
    return CompatibilityScenario(tuple(names), tuple(ctxs), PM)


def juxtapose(B1: Behavior, B2: Behavior) -> Behavior:
    """Side-by-side composition: measurements and contexts are concatenated."""
    s1, s2 = B1.scenario, B2.scenario
    if s1.outcomes != s2.outcomes:
        raise DomainError("juxtaposition needs a common outcome set")
    names = _disjoint_names(s1.measurements, s2.measurements)
    off = len(s1.measurements)
    ctxs = list(s1.contexts) + [tuple(m + off for m in c) for c in s2.contexts]
    sc = CompatibilityScenario(names, tuple(ctxs), s1.outcomes)
    t1, t2 = _common_mode(B1, B2)
    return Behavior(sc, t1 + t2)


def tensor(B1: Behavior, B2: Behavior) -> Behavior:
    """Product behavior on the product scenario (contexts are all pairs C1 u C2)."""
    s1, s2 = B1.scenario, B2.scenario
    if s1.outcomes != s2.outcomes:
        raise DomainError("tensor product needs a common outcome set")
    names = _disjoint_names(s1.measurements, s2.measurements)
    off = len(s1.measurements)
    ctxs = []
    t1, t2 = _common_mode(B1, B2)
    rows = []
    for a, ca in enumerate(s1.contexts):
        for b, cb in enumerate(s2.contexts):
            ctxs.append(ca + tuple(m + off for m in cb))
            # measurements of ca precede those of cb, so strings concatenate
            rows.append(tuple(x * y for x in t1[a] for y in t2[b]))
    sc = CompatibilityScenario(names, tuple(ctxs), s1.outcomes)
    return Behavior(sc, tuple(rows))


def _disjoint_names(n1: tuple, n2: tuple) -> tuple:
    if set(n1) & set(n2):
        return tuple(f"L.{m}" for m in n1) + tuple(f"R.{m}" for m in n2)
    return n1 + n2


def _common_mode(B1: Behavior, B2: Behavior):
    if B1.exact and B2.exact:
        return B1.table, B2.table
    return B1.to_float().table, B2.to_float().table
