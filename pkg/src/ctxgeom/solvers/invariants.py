"""Weighted independence and fractional packing numbers."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from ..errors import ResourceLimitError
from ..graphs import Graph, max_weight_independent_set, maximal_cliques
from .lp import LPProblem, solve_lp

MAX_INDEPENDENCE_VERTICES = 40


@dataclass
class IndependenceResult:
    value: object
    witness: tuple


@dataclass
class PackingResult:
    value: object
    point: tuple
    cliques: list


def _weights(G: Graph, weights):
    return tuple(weights) if weights is not None else G.vertex_weights()


def independence_number(G: Graph, weights: Sequence | None = None) -> IndependenceResult:
    """Weighted independence number by branch and bound, with a witness set."""
    if G.n > MAX_INDEPENDENCE_VERTICES:
        raise ResourceLimitError(f"independence number limited to {MAX_INDEPENDENCE_VERTICES} vertices")
    w = _weights(G, weights)
    S = max_weight_independent_set(G, w)
    return IndependenceResult(sum((w[i] for i in S), 0 * w[0] if w else 0), S)


def fractional_packing(G: Graph, weights: Sequence | None = None,
                       exact: bool | None = None) -> PackingResult:
    """``max sum w_i p_i`` over the clique-constrained polytope (exact LP for rational weights)."""
    w = _weights(G, weights)
    if G.n == 0:
        return PackingResult(0, (), [])
    cliques = maximal_cliques(G)
    rows = []
    for Q in cliques:
        row = [0] * G.n
        for v in Q:
            row[v] = 1
        rows.append(row)
    sol = solve_lp(LPProblem(list(w), rows, ["<="] * len(rows), [1] * len(rows), "max"), exact=exact)
    return PackingResult(sol.objective, sol.x, cliques)
