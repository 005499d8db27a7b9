import math

import cvxpy as cp
import networkx as nx
import numpy as np
import pytest

from ctxgeom.graphs import complement, named_graph, suspension
from ctxgeom.solvers.invariants import fractional_packing, independence_number
from ctxgeom.solvers.sdp import SDPProblem, lovasz_theta, solve_sdp

from conftest import random_graph


def cvx_theta(G, w=None):
    n = G.n
    w = np.ones(n) if w is None else np.asarray(w, dtype=float)
    s = np.sqrt(w)
    X = cp.Variable((n, n), symmetric=True)
    cons = [X >> 0, cp.trace(X) == 1] + [X[i, j] == 0 for i, j in G.edges]
    prob = cp.Problem(cp.Maximize(cp.sum(cp.multiply(np.outer(s, s), X))), cons)
    prob.solve(solver="SCS", eps=1e-9, max_iters=200000)
    return prob.value


@pytest.mark.parametrize("n", [5, 7, 9])
def test_odd_cycles(n):
    c = math.cos(math.pi / n)
    th = lovasz_theta(named_graph("cycle", n))
    assert th.value == pytest.approx(n * c / (1 + c), abs=1e-6)
    assert th.lower <= th.value <= th.upper


@pytest.mark.parametrize("G,value", [
    (named_graph("complete", 5), 1.0),
    (named_graph("cycle", 6), 3.0),
    (named_graph("empty", 4), 4.0),
    (named_graph("prism", 5), 2 * math.sqrt(5)),
    (named_graph("moebius-ladder", 8), 2 + math.sqrt(2)),
    (suspension(named_graph("cycle", 5)), math.sqrt(5)),
])
def test_known_values(G, value):
    assert lovasz_theta(G).value == pytest.approx(value, abs=1e-6)


@pytest.mark.parametrize("family,n", [("prism", 5), ("moebius-ladder", 8)])
def test_ladders_match_cvxpy(family, n):
    G = named_graph(family, n)
    ours = lovasz_theta(G).value
    assert ours == pytest.approx(cvx_theta(G), abs=1e-5)
    # vertex-transitive graphs satisfy theta(G) theta(complement) = n
    assert ours * cvx_theta(complement(G)) == pytest.approx(G.n, abs=1e-4)


def test_matches_cvxpy_weighted(rng):
    for _ in range(5):
        G = random_graph(8, 0.4, rng)
        w = rng.uniform(0.5, 2.0, G.n)
        ours = lovasz_theta(G, w).value
        assert ours == pytest.approx(cvx_theta(G, w), abs=1e-5)


def test_sandwich_random_graphs(rng):
    for _ in range(20):
        G = random_graph(int(rng.integers(4, 13)), float(rng.uniform(0.2, 0.6)), rng)
        a = independence_number(G).value
        H = nx.Graph()
        H.add_nodes_from(range(G.n))
        H.add_edges_from(G.edges)
        assert a == max(len(c) for c in nx.find_cliques(nx.complement(H)))
        th = lovasz_theta(G).value
        fp = fractional_packing(G).value
        assert a - 1e-6 <= th <= float(fp) + 1e-6


def test_small_sdp():
    # min <C, X> with tr X = 1: the smallest eigenvalue of C
    C = np.array([[2.0, 1.0], [1.0, 3.0]])
    sol = solve_sdp(SDPProblem(C, [(np.eye(2), 1.0)]))
    assert sol.primal_objective == pytest.approx(np.linalg.eigvalsh(C)[0], abs=1e-7)


def test_packing_values():
    from fractions import Fraction as F
    assert fractional_packing(named_graph("cycle", 5)).value == F(5, 2)
    assert fractional_packing(named_graph("cycle", 7)).value == F(7, 2)
    assert fractional_packing(named_graph("complete", 4)).value == 1
    assert independence_number(named_graph("cycle", 7)).value == 3
