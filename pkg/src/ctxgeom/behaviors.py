"""Standard behaviors and Bell-type functionals used in tests, fixtures and the CLI."""
from __future__ import annotations

import math
from fractions import Fraction

from .errors import DomainError
from .graphs import named_graph
from .scenario import PM, Behavior, CompatibilityScenario, scenario_from_graph


def ncycle_scenario(n: int) -> CompatibilityScenario:
    """Two-outcome scenario on the n-cycle (contexts ``(i, i+1)`` then ``(0, n-1)``)."""
    if n < 3:
        raise DomainError("the n-cycle scenario needs n >= 3")
    return scenario_from_graph(named_graph("cycle", n))


def correlator_behavior(scenario: CompatibilityScenario, correlators, marginals=None) -> Behavior:
    """Two-outcome behavior on edge contexts from correlators ``E_k`` and marginals ``<A_i>``.

    ``p(a, b) = (1 + a<A_i> + b<A_j> + ab E) / 4`` with ``a, b`` in ``{+1, -1}``.
    """
    if scenario.outcomes != PM:
        raise DomainError("correlator behaviors need outcomes (+1, -1)")
    n = len(scenario.measurements)
    if marginals is None:
        marginals = [0] * n
    zero_one = Fraction(1, 4) if all(isinstance(v, (int, Fraction)) for v in list(correlators) + list(marginals)) else 0.25
    rows = []
    for k, C in enumerate(scenario.contexts):
        if len(C) != 2:
            raise DomainError("correlator behaviors need edge contexts")
        i, j = C
        E = correlators[k]
        rows.append(tuple(zero_one * (1 + a * marginals[i] + b * marginals[j] + a * b * E)
                          for a in PM for b in PM))
    return Behavior(scenario, tuple(rows))


def pr_box(n: int = 4) -> Behavior:
    """Maximally contextual no-signalling box on the n-cycle.

    Every edge is perfectly correlated except the closing edge ``(0, n-1)``,
    which is perfectly anticorrelated; marginals are uniform.
    """
    sc = ncycle_scenario(n)
    return correlator_behavior(sc, [1] * (n - 1) + [-1])


def tsirelson_box(n: int = 4) -> Behavior:
    """Unbiased n-cycle point with ``E = cos(pi/n)`` on every edge but ``-cos(pi/n)`` on the closing one.

    It lies on the boundary of the elliptope of the cycle; for ``n = 4`` it
    is the optimal quantum CHSH behavior.
    """
    c = math.cos(math.pi / n)
    return correlator_behavior(ncycle_scenario(n), [c] * (n - 1) + [-c])


def isotropic_box(n: int, v) -> Behavior:
    """``v PR + (1 - v) uniform`` on the n-cycle."""
    return correlator_behavior(ncycle_scenario(n), [v] * (n - 1) + [-v])


BELL_3322 = ("A1", "A2", "A3", "B1", "B2", "B3")


def bell_scenario(ma: int = 3, mb: int = 3) -> CompatibilityScenario:
    """Bipartite two-outcome scenario with contexts ``AiBj`` (A-major order)."""
    names = [f"A{i + 1}" for i in range(ma)] + [f"B{j + 1}" for j in range(mb)]
    ctxs = [(i, ma + j) for i in range(ma) for j in range(mb)]
    return CompatibilityScenario(tuple(names), tuple(ctxs), PM)


def table_3322() -> Behavior:
    """Deterministic-correlator 3322 box: anticorrelated on A2B2, A2B3, A3B3, correlated elsewhere."""
    sc = bell_scenario()
    anti = {(1, 4), (1, 5), (2, 5)}
    E = [-1 if C in anti else 1 for C in sc.contexts]
    return correlator_behavior(sc, E)


# coefficients c[(i, j)] on p(Ai=+1, Bj=+1), then marginal coefficients
_I3322_STANDARD = ({(1, 1): 1, (1, 2): 1, (1, 3): 1, (2, 1): 1, (2, 2): 1, (2, 3): -1,
                    (3, 1): 1, (3, 2): -1}, {"A1": -1, "B1": -2, "B2": -1})
# the same inequality after B2 <-> B3 and exchanging the parties
_I3322_RELABELED = ({(1, 1): 1, (3, 1): 1, (2, 1): 1, (1, 2): 1, (3, 2): 1, (2, 2): -1,
                     (1, 3): 1, (3, 3): -1}, {"B1": -1, "A1": -2, "A3": -1})


def _plus(B: Behavior, names):
    sc = B.scenario
    idx = [sc.measurements.index(m) for m in names]
    # any context containing the measurements will do for a non-disturbing behavior
    k = next(k for k, C in enumerate(sc.contexts) if set(idx) <= set(C))
    C = sc.contexts[k]
    total = 0 * B.table[k][0]
    for s, pr in zip(sc.outcome_strings(k), B.table[k]):
        if all(s[C.index(i)] == PM[0] for i in idx):
            total += pr
    return total


def i3322_value(B: Behavior, relabeled: bool = True):
    """Collins-Gisin I3322 expression (classical bound 0).

    ``relabeled=False`` gives the textbook labeling; the relabeled form is the
    one violated by :func:`table_3322`.
    """
    joint, marg = _I3322_RELABELED if relabeled else _I3322_STANDARD
    val = 0
    for (i, j), c in joint.items():
        val += c * _plus(B, (f"A{i}", f"B{j}"))
    for m, c in marg.items():
        val += c * _plus(B, (m,))
    return val


def chsh_value(B: Behavior, a=("A1", "A2"), b=("B1", "B2")):
    """``E11 + E12 + E21 - E22`` on the given pair of settings per party (classical bound 2)."""
    sc = B.scenario

    def E(x, y):
        k = sc.context_of([sc.measurements.index(x), sc.measurements.index(y)])
        return sum(pr * s[0] * s[1] for s, pr in zip(sc.outcome_strings(k), B.table[k]))

    return E(a[0], b[0]) + E(a[0], b[1]) + E(a[1], b[0]) - E(a[1], b[1])
