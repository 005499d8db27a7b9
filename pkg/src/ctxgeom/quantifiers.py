"""Contextuality quantifiers for compatibility scenarios, and free operations.

Every quantifier takes a non-disturbing :class:`Behavior` and returns a
:class:`QuantifierReport`.  LP-based quantities (contextual fraction,
robustness, l1 and l-infinity distances) are exact for rational behaviors;
the Euclidean and entropic ones are computed in floating point.

Distances are measured against the classical polytope, the convex hull of
the deterministic behaviors (columns of the incidence matrix).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import product
from typing import Sequence

import numpy as np

from ._numeric import is_exact, number_to_json, to_number
from .errors import DomainError, NotApplicableError, SolverError
from .graphs import Graph, graph_automorphisms
from .polytopes import (correlation_polytope, ncycle_facets_pm1, phi, suspension_cut_polytope,
                        alpha)
from .scenario import (Behavior, CompatibilityScenario, compatibility_graph,
                       require_nondisturbing, uniform_behavior)
from .solvers.hull import (WeightedKL, frank_wolfe, lp_group_distance,
                           membership_in_vpolytope, minimize_max_over_groups, weighted_qp)
from .solvers.lp import LPProblem, solve_lp

KL_BASE = 2.0
KL_MIXING = 1e-12
FW_TOL = 1e-9
NORMS = ("l1", "l2", "linf")
VARIANTS = ("D", "D_u", "D_max")


@dataclass
class QuantifierReport:
    """A quantifier value with the evidence behind it.

    ``certificate`` holds solver-independent evidence (optimal classical
    behavior, mixture weights, LP solutions, violated rows); ``diagnostics``
    holds solver state (gaps, iterations, method).
    """

    name: str
    value: object
    certificate: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)

    def __float__(self) -> float:
        return float(self.value)

    def to_json(self) -> dict:
        return {"name": self.name, "value": to_jsonable(self.value),
                "value_float": float(self.value),
                "certificate": to_jsonable(self.certificate),
                "diagnostics": to_jsonable(self.diagnostics)}


def to_jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, (Fraction, int)) and not isinstance(obj, bool):
        return number_to_json(obj)
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else str(obj)
    return obj


# --- classical polytope data ------------------------------------------------------

@lru_cache(maxsize=32)
def _classical(scenario: CompatibilityScenario):
    M = scenario.incidence_matrix()
    verts = [tuple(int(a) for a in M[:, j]) for j in range(M.shape[1])]
    return M.astype(float), verts


def _context_groups(scenario: CompatibilityScenario) -> list:
    off = scenario.offsets
    return [list(range(off[k], off[k + 1])) for k in range(scenario.num_contexts)]


def classical_decomposition(B: Behavior):
    """Weights over global assignments reproducing ``B``, or ``None`` if contextual."""
    _, verts = _classical(B.scenario)
    res = membership_in_vpolytope(B.flatten(), verts, exact=B.exact)
    return res.weights if res.inside else None


def _zero_report(name: str, B: Behavior, weights, **diag) -> QuantifierReport:
    zero = Fraction(0) if B.exact else 0.0
    return QuantifierReport(name, zero, {"classical_weights": weights,
                                         "nearest_classical": B.flatten()},
                            {"method": "classical", **diag})


def _nearest_behavior(B: Behavior, vec) -> tuple:
    return tuple(vec)


# --- contextual fraction and robustness -------------------------------------------

def contextual_fraction(B: Behavior) -> QuantifierReport:
    """``1 - max 1.b`` over subnormalized global sections ``b`` with ``M b <= P_B``."""
    require_nondisturbing(B)
    M, _ = _classical(B.scenario)
    P = B.flatten()
    rows = [[int(a) for a in r] for r in M]
    m = M.shape[1]
    sol = solve_lp(LPProblem([1] * m, rows, ["<="] * len(rows), list(P), "max"), exact=B.exact)
    if not sol.optimal:
        raise SolverError(f"contextual fraction LP ended with status {sol.status}")
    value = 1 - sol.objective
    if not B.exact:
        value = max(0.0, float(value))
    return QuantifierReport("CF", value, {"global_section": sol.x, "duals": sol.duals},
                            {"method": "lp", "iterations": sol.iterations, "exact": sol.exact})


ROBUSTNESS_METHODS = ("lp", "noncontextual", "white")


def robustness(B: Behavior, method: str = "lp") -> QuantifierReport:
    """Robustness of contextuality.

    ``method``:

    * ``"lp"``: ``1 - 1/(1.b*)`` with ``b* = argmin 1.b`` subject to ``M b >= P_B``,
      ``b >= 0``.  The noise absorbed by this program is any non-disturbing
      behavior, so this is the generalized robustness.
    * ``"noncontextual"``: the least ``w`` with ``(1-w) B + w N`` classical for
      some classical ``N``.
    * ``"white"``: the same with ``N`` fixed to the uniform behavior.
    """
    require_nondisturbing(B)
    M, _ = _classical(B.scenario)
    P = list(B.flatten())
    rows = [[int(a) for a in r] for r in M]
    D, m = M.shape
    if method == "lp":
        sol = solve_lp(LPProblem([1] * m, rows, [">="] * D, P, "min"), exact=B.exact)
        if not sol.optimal:
            raise SolverError(f"robustness LP ended with status {sol.status}")
        value = 1 - 1 / sol.objective
        cert = {"supernormalized_section": sol.x, "duals": sol.duals}
    elif method == "noncontextual":
        # variables: b (m), c (m), w;  M b - M c + w P = P, 1.b = 1, 1.c - w = 0
        A = [r + [-a for a in r] + [p] for r, p in zip(rows, P)]
        A.append([1] * m + [0] * m + [0])
        A.append([0] * m + [1] * m + [-1])
        sol = solve_lp(LPProblem([0] * (2 * m) + [1], A, ["="] * (D + 2), P + [1, 0], "min"),
                       exact=B.exact)
        if not sol.optimal:
            raise SolverError(f"robustness LP ended with status {sol.status}")
        value = sol.objective
        w = sol.x[-1]
        cert = {"mixture_weights": sol.x[:m], "noise_weights": sol.x[m:2 * m],
                "mixing": w}
    elif method == "white":
        u = list(uniform_behavior(B.scenario).flatten())
        A = [r + [p - uu] for r, p, uu in zip(rows, P, u)]
        A.append([1] * m + [0])
        sol = solve_lp(LPProblem([0] * m + [1], A, ["="] * (D + 1), P + [1], "min"),
                       exact=B.exact)
        if not sol.optimal:
            raise SolverError(f"robustness LP ended with status {sol.status}")
        value = sol.objective
        cert = {"mixture_weights": sol.x[:m]}
    else:
        raise DomainError(f"unknown robustness method {method!r}")
    if not B.exact:
        value = max(0.0, float(value))
    return QuantifierReport("R", value, cert, {"method": method, "iterations": sol.iterations,
                                               "exact": sol.exact})


# --- distances ------------------------------------------------------------------

def _check_norm_variant(norm: str, variant: str):
    if norm not in NORMS:
        raise DomainError(f"norm must be one of {NORMS}")
    if variant not in VARIANTS:
        raise DomainError(f"variant must be one of {VARIANTS}")


def _coord_weights(groups, pi, d) -> np.ndarray:
    w = np.zeros(d)
    for g, idx in enumerate(groups):
        w[idx] += pi[g]
    return w


def _sum_of_l2(A: np.ndarray, p: np.ndarray, groups, weights, tol: float,
               max_iter: int = 2000):
    """``min_lam sum_g w_g ||(A lam - p)_g||_2`` by iteratively reweighted least squares.

    Each step majorizes ``||r_g||`` by ``||r_g||^2 / (2 c_g) + c_g / 2`` at the
    current residual norms and solves the weighted QP.  The lower bound uses
    the unit directions ``u_g = r_g / ||r_g||``: ``sum_g w_g u_g . r_g(lam)`` is
    linear in ``lam`` and minorizes the objective, so its minimum over the
    vertices bounds the optimum from below.
    """
    Vt = A.T
    groups = [np.asarray(g) for g in groups]
    weights = np.asarray(weights, dtype=float)
    lam = _start_lam(Vt, p)
    best = (np.inf, lam, 0.0)
    floor = 1e-10
    its = stall = 0
    for it in range(1, max_iter + 1):
        r = A @ lam - p
        norms = np.array([float(np.linalg.norm(r[g])) for g in groups])
        value = float(weights @ norms)
        U = np.zeros_like(p)
        for w, g, nr in zip(weights, groups, norms):
            if nr > 0:
                U[g] += w * r[g] / nr
        lower = float(np.min(Vt @ U - U @ p))
        if value < best[0] - 1e-14:
            stall = 0
        else:
            stall += 1
        if value < best[0]:
            best = (value, lam, lower)
        best = (best[0], best[1], max(best[2], lower))
        its = it
        # the directional lower bound is loose when some residuals vanish, so
        # also stop once the upper bound has stopped moving
        if best[0] - best[2] <= tol or stall >= 50:
            break
        cw = np.zeros_like(p)
        for w, g, nr in zip(weights, groups, norms):
            cw[g] += w / (2.0 * max(nr, floor))
        lam, _, _, _ = weighted_qp(Vt, p, cw, max_iter=20_000, lam0=lam, strict=False)
    value, lam, lower = best
    return lam, value, max(lower, 0.0), its


def _start_lam(Vt: np.ndarray, p: np.ndarray) -> np.ndarray:
    lam = np.zeros(Vt.shape[0])
    lam[int(np.argmin(((Vt - p) ** 2).sum(axis=1)))] = 1.0
    return lam


def hull_distance(point: Sequence, verts, groups, norm: str, variant: str,
                  exact: bool | None = None) -> dict:
    """Distance core shared by the behavior, psi-space and exclusivity quantifiers.

    ``variant``: ``"D"`` (norm of the whole difference), ``"D_u"`` (sum of
    per-group norms, unnormalized) or ``"D_max"`` (max of per-group norms).
    """
    _check_norm_variant(norm, variant)
    if variant == "D":
        groups = [list(range(len(point)))]
    if norm in ("l1", "linf"):
        agg = "max" if variant == "D_max" else "sum"
        res = lp_group_distance(point, verts, groups, norm, agg, None, exact)
        return {"value": res.distance, "nearest": res.nearest, "weights": res.weights,
                "gap": 0.0, "iterations": res.iterations, "exact": res.exact, "method": "lp"}
    A = np.array([[float(a) for a in v] for v in verts]).T
    p = np.array([float(a) for a in point])
    if variant == "D":
        lam, val, gap, it = weighted_qp(A.T, p)
        value = math.sqrt(max(val, 0.0))
        method = "frank-wolfe-qp"
        extra = {"gap": gap}
    elif variant == "D_u":
        lam, value, lower, it = _sum_of_l2(A, p, groups, np.ones(len(groups)), FW_TOL)
        method = "irls"
        extra = {"gap": value - lower, "lower_bound": lower}
    else:
        K = len(groups)

        def inner(pi):
            w = _coord_weights(groups, pi, len(p))
            lam, _, gap, _ = weighted_qp(A.T, p, w)
            return lam, gap

        def per_group(lam):
            r = A @ lam - p
            return np.array([float(r[g] @ r[g]) for g in groups])

        mm = minimize_max_over_groups(inner, per_group, K, tol=1e-9)
        lam = mm.weights
        value = math.sqrt(max(mm.value, 0.0))
        it = mm.iterations
        method = "cutting-plane"
        extra = {"gap": mm.value - mm.lower, "lower_bound": math.sqrt(max(mm.lower, 0.0)),
                 "pi": mm.pi}
    nearest = A @ lam
    return {"value": value, "nearest": tuple(nearest), "weights": tuple(lam),
            "iterations": it, "exact": False, "method": method, **extra}


def distance_quantifier(B: Behavior, norm: str = "l1", variant: str = "D") -> QuantifierReport:
    """Contextuality distance of ``B`` in the flattened probability coordinates.

    ``D`` is the distance of ``P_B`` to the classical polytope, ``D_u`` the
    per-context distances averaged over the ``N`` contexts, ``D_max`` their
    maximum.
    """
    _check_norm_variant(norm, variant)
    require_nondisturbing(B)
    name = f"{variant}[{norm}]"
    w = classical_decomposition(B)
    if w is not None:
        return _zero_report(name, B, w)
    _, verts = _classical(B.scenario)
    groups = _context_groups(B.scenario)
    res = hull_distance(B.flatten(), verts, groups, norm, variant, B.exact if norm != "l2" else False)
    raw = res["value"]
    value = raw / B.scenario.num_contexts if variant == "D_u" else raw
    cert = {"nearest_classical": res["nearest"], "classical_weights": res["weights"]}
    diag = {k: v for k, v in res.items() if k not in ("value", "nearest", "weights")}
    diag["raw"] = raw
    return QuantifierReport(name, value, cert, diag)


def distance_quantifiers(B: Behavior, norm: str = "l1", variant: str = "D") -> QuantifierReport:
    return distance_quantifier(B, norm, variant)


# --- entropic quantifiers ----------------------------------------------------------

def _start(m: int, seed: int | None) -> np.ndarray:
    if seed is None:
        return np.full(m, 1.0 / m)
    return np.random.default_rng(seed).dirichlet(np.ones(m))


def _kl_values_and_jac(A: np.ndarray, p: np.ndarray, groups, base: float, lam: np.ndarray):
    q = A @ lam
    ratio = np.divide(p, q, out=np.zeros_like(p), where=p > 0)
    logs = np.log(np.where(p > 0, ratio, 1.0))
    scale = math.log(base)
    f = np.array([p[g] @ logs[g] for g in groups]) / scale
    J = np.array([-(ratio[g] @ A[g]) for g in groups]) / scale
    return f, J


def _linearized_lower_bound(f: np.ndarray, J: np.ndarray, lam: np.ndarray) -> float:
    """Best bound ``pi.f + min_j (J^T pi)_j - (J^T pi).lam`` over weightings ``pi``.

    Each ``f_k`` is convex, so its tangent at ``lam`` underestimates it on
    the simplex; the bound is exact when ``lam`` is a minimax point.
    """
    from scipy.optimize import linprog

    K, m = J.shape
    c = np.append(-(f - J @ lam), -1.0)
    res = linprog(c, A_ub=np.hstack([-J.T, np.ones((m, 1))]), b_ub=np.zeros(m),
                  A_eq=np.append(np.ones(K), 0.0)[None, :], b_eq=[1.0],
                  bounds=[(0, None)] * K + [(None, None)], method="highs")
    return -float(res.fun) if res.status == 0 else -math.inf


def _max_kl(A: np.ndarray, p: np.ndarray, groups, base: float, seed, tol: float):
    """``min_lam max_k KL_k`` via SLSQP on the epigraph, with a tangent-plane lower bound.

    Falls back to cutting planes when SLSQP fails or the bound stays loose.
    """
    from scipy.optimize import minimize

    K, m = len(groups), A.shape[1]
    avg = WeightedKL(p, groups, [1.0 / K] * K, base)
    lam0, _, _, _ = frank_wolfe(avg, A, _start(m, seed), 1e-6)
    f0, _ = _kl_values_and_jac(A, p, groups, base, lam0)

    def cons(x):
        return x[-1] - _kl_values_and_jac(A, p, groups, base, x[:m])[0]

    def cons_jac(x):
        return np.hstack([-_kl_values_and_jac(A, p, groups, base, x[:m])[1], np.ones((K, 1))])

    res = minimize(lambda x: x[-1], np.append(lam0, f0.max()), jac=lambda x: np.eye(m + 1)[-1],
                   method="SLSQP", bounds=[(0.0, 1.0)] * m + [(None, None)],
                   constraints=[{"type": "ineq", "fun": cons, "jac": cons_jac},
                                {"type": "eq", "fun": lambda x: x[:m].sum() - 1.0,
                                 "jac": lambda x: np.append(np.ones(m), 0.0)}],
                   options={"ftol": 1e-14, "maxiter": 1000})
    lam = np.clip(res.x[:m], 0.0, None)
    lam /= lam.sum()
    f, J = _kl_values_and_jac(A, p, groups, base, lam)
    value, lower = float(f.max()), _linearized_lower_bound(f, J, lam)
    if value - lower <= max(1e-7, 1e-6 * abs(value)):
        return lam, value, lower, int(res.nit), "slsqp"

    def inner(pi):
        lam_pi, _, gap, _ = frank_wolfe(WeightedKL(p, groups, pi, base), A, _start(m, seed), tol)
        return lam_pi, gap

    mm = minimize_max_over_groups(inner, lambda l: _kl_values_and_jac(A, p, groups, base, l)[0],
                                  K, tol=1e-8)
    if mm.value < value:
        lam, value = mm.weights, mm.value
    return lam, value, max(lower, mm.lower), int(res.nit) + mm.iterations, "cutting-plane"


def entropic_quantifier(B: Behavior, variant: str = "E_u", base: float = KL_BASE,
                        seed: int | None = None, tol: float = FW_TOL) -> QuantifierReport:
    """Relative entropy of contextuality.

    ``E_u``: average over contexts of ``KL(p_C || q_C)`` minimized over
    classical ``q`` (Frank-Wolfe); ``E_max``: the largest per-context
    divergence minimized (SLSQP with a tangent-plane lower bound).
    The classical candidates are kept strictly positive by mixing in
    ``1e-12`` of the uniform behavior.
    """
    if variant not in ("E_u", "E_max"):
        raise DomainError("variant must be 'E_u' or 'E_max'")
    require_nondisturbing(B)
    w = classical_decomposition(B)
    if w is not None:
        return _zero_report(variant, B, w)
    sc = B.scenario
    M, _ = _classical(sc)
    u = uniform_behavior(sc).as_array()
    A = (1.0 - KL_MIXING) * M + KL_MIXING * u[:, None]
    p = B.as_array()
    groups = _context_groups(sc)
    N = sc.num_contexts
    if variant == "E_u":
        obj = WeightedKL(p, groups, [1.0 / N] * N, base)
        lam, value, gap, it = frank_wolfe(obj, A, _start(A.shape[1], seed), tol)
        q = A @ lam
        diag = {"gap": gap, "iterations": it, "method": "frank-wolfe", "base": base}
        per = obj.per_group(q)
    else:
        lam, value, lower, it, method = _max_kl(A, p, groups, base, seed, tol)
        q = A @ lam
        per = WeightedKL(p, groups, [1.0] * N, base).per_group(q)
        diag = {"gap": max(0.0, value - lower), "lower_bound": lower, "iterations": it,
                "method": method, "base": base}
    value = max(0.0, float(value))
    return QuantifierReport(variant, value, {"nearest_classical": tuple(q),
                                             "classical_weights": tuple(lam),
                                             "per_context": tuple(per)}, diag)


def entropic_quantifiers(B: Behavior, variant: str = "E_u", **kw) -> QuantifierReport:
    return entropic_quantifier(B, variant, **kw)


# --- two-outcome descriptions -----------------------------------------------------

SPACES = ("psi", "phi", "alpha")


def _space_setup(G: Graph, vec: Sequence, space: str):
    n = G.n
    groups = [[i, j, n + t] for t, (i, j) in enumerate(G.edges)]
    if space == "psi":
        return vec, suspension_cut_polytope(G).vertices, groups
    if space == "alpha":
        return alpha(vec), tuple(alpha(v) for v in suspension_cut_polytope(G).vertices), groups
    if space == "phi":
        return vec, correlation_polytope(G).vertices, groups
    raise DomainError(f"space must be one of {SPACES}")


def psi_space_quantifiers(data, norm: str = "l1", variant: str = "D", space: str = "psi",
                          G: Graph | None = None) -> QuantifierReport:
    """Distances in the correlation (``phi``), expectation (``psi``) or 0/1 cut
    (``alpha``) coordinates of a two-outcome scenario whose contexts are edges.

    ``data`` is a :class:`Behavior` or a coordinate vector (then ``G`` is
    required and the vector must already be in the requested space's input:
    ``q`` for ``phi``, ``x`` for ``psi`` and ``alpha``).  Groups for ``D_u`` and
    ``D_max`` are the triples ``(i, j, ij)`` of each edge.  The report value
    follows the definitions (``D`` and ``D_u`` carry a ``1/|E|`` prefactor,
    ``D_max`` none); ``diagnostics["raw"]`` is the bare minimum.
    """
    _check_norm_variant(norm, variant)
    if isinstance(data, Behavior):
        require_nondisturbing(data)
        G = G or Graph(len(data.scenario.measurements),
                       tuple(c for c in data.scenario.contexts if len(c) == 2))
        q = phi(data, G)
        from .polytopes import psi as _psi
        vec = q if space == "phi" else _psi(q, G)
    else:
        if G is None:
            raise DomainError("a graph is needed for coordinate input")
        vec = tuple(to_number(v) for v in data)
        if len(vec) != G.n + len(G.edges):
            raise DomainError(f"expected {G.n + len(G.edges)} coordinates")
    point, verts, groups = _space_setup(G, vec, space)
    exact = is_exact(point) and norm != "l2"
    res = hull_distance(point, verts, groups, norm, variant, exact)
    raw = res["value"]
    E = len(G.edges)
    value = raw if variant == "D_max" else raw / E
    name = f"{variant}^{space}[{norm}]"
    diag = {k: v for k, v in res.items() if k not in ("value", "nearest", "weights")}
    diag.update({"raw": raw, "normalized": raw / E, "edges": E})
    return QuantifierReport(name, value, {"nearest_classical": res["nearest"],
                                          "classical_weights": res["weights"]}, diag)


def dual_exponent(norm: str) -> float:
    """``q`` with ``1/p + 1/q = 1``; returned as ``math.inf`` for ``l1``."""
    return {"l1": math.inf, "l2": 2.0, "linf": 1.0}[norm]


def norm_scale(n: int, norm: str) -> float:
    """``n^(1/q)`` for the dual exponent of ``norm``."""
    q = dual_exponent(norm)
    return 1.0 if math.isinf(q) else n ** (1.0 / q)


def ncycle_closed_form(x: Sequence, n: int, norm: str = "l1") -> dict:
    """Distance to CUT±1 of the suspended n-cycle for a point violating one cycle facet.

    ``x`` is either the ``n`` edge correlators or the full ``2n`` expectation
    vector (the ``x_e`` block is ignored).  Returns ``value`` (with the
    ``1/n`` prefactor), ``raw`` (without it), the violated row and the
    violation.  No violated row gives 0; two or more raise
    :class:`NotApplicableError`.

    For expectation vectors of non-disturbing behaviors this is the exact
    distance.  For other vectors it is the distance to the facet hyperplane,
    which only bounds the polytope distance from below.
    """
    if norm not in NORMS:
        raise DomainError(f"norm must be one of {NORMS}")
    if len(x) == 2 * n:
        x = x[n:]
    if len(x) != n:
        raise DomainError(f"expected {n} or {2 * n} coordinates")
    H = ncycle_facets_pm1(n)
    xs = [to_number(v) for v in x]
    viols = [(i, -s) for i, s in enumerate(H.slacks(xs)) if s < 0]
    if len(viols) >= 2:
        raise NotApplicableError(f"{len(viols)} cycle facets are violated")
    if not viols:
        return {"value": 0.0, "raw": 0.0, "row": None, "violation": 0}
    i, v = viols[0]
    raw = float(v) / norm_scale(n, norm)
    return {"value": raw / n, "raw": raw, "row": H.A[i], "violation": v}


# --- free operations ---------------------------------------------------------------

def scenario_automorphisms(scenario: CompatibilityScenario) -> list:
    """Measurement permutations mapping the context set onto itself."""
    ctxs = set(scenario.contexts)
    out = []
    for perm in graph_automorphisms(compatibility_graph(scenario)):
        if all(tuple(sorted(perm[m] for m in c)) in ctxs for c in scenario.contexts):
            out.append(perm)
    return out


@dataclass(frozen=True)
class FreeOperation:
    """An operation mapping classical behaviors to classical behaviors.

    * ``relabeling``: measurement permutation ``permutation`` (``m -> perm[m]``),
      which must map contexts to contexts, with optional per-measurement
      outcome permutations ``outcome_maps[m][o] = o'`` (outcome indices).
    * ``post-processing``: ``components`` is a list of ``(weight, kernels)``
      where ``kernels[m]`` is a row-stochastic ``|O| x |O|`` matrix applied to
      measurement ``m``; the context kernel is the weighted sum of the tensor
      products, i.e. local classical processing with shared randomness.
    * ``pre-processing``: ``components`` is a list of ``(weight, permutation)``
      with scenario automorphisms; each context of the output is fed by the
      weighted preimages, so the total weight leaving each input context is 1.
    """

    kind: str
    permutation: tuple | None = None
    outcome_maps: tuple | None = None
    components: tuple = ()

    def __post_init__(self):
        if self.kind not in ("relabeling", "post-processing", "pre-processing"):
            raise DomainError(f"unknown operation kind {self.kind!r}")
        if self.kind == "post-processing":
            total = 0
            for w, kernels in self.components:
                if w < 0:
                    raise DomainError("mixture weights must be nonnegative")
                total += w
                for K in kernels:
                    for row in K:
                        if any(a < 0 for a in row) or abs(sum(row) - 1) > 1e-12:
                            raise DomainError("post-processing kernels must be row-stochastic")
            if abs(total - 1) > 1e-12:
                raise DomainError("mixture weights must sum to 1")
        if self.kind == "pre-processing":
            total = sum(w for w, _ in self.components)
            if any(w < 0 for w, _ in self.components) or abs(total - 1) > 1e-12:
                raise DomainError("pre-processing weights must be a probability vector")

    @classmethod
    def relabeling(cls, permutation: Sequence[int], outcome_maps=None) -> "FreeOperation":
        om = tuple(tuple(m) for m in outcome_maps) if outcome_maps is not None else None
        return cls("relabeling", tuple(permutation), om)

    @classmethod
    def post_processing(cls, components) -> "FreeOperation":
        comps = tuple((to_number(w), tuple(tuple(tuple(to_number(a) for a in row) for row in K)
                                           for K in kernels)) for w, kernels in components)
        return cls("post-processing", components=comps)

    @classmethod
    def local_post_processing(cls, kernels) -> "FreeOperation":
        return cls.post_processing([(1, kernels)])

    @classmethod
    def pre_processing(cls, components) -> "FreeOperation":
        return cls("pre-processing", components=tuple((to_number(w), tuple(p)) for w, p in components))


def _relabel(B: Behavior, perm: Sequence[int], outcome_maps=None) -> Behavior:
    sc = B.scenario
    nm = len(sc.measurements)
    if sorted(perm) != list(range(nm)):
        raise DomainError("relabeling needs a permutation of the measurements")
    index = {c: k for k, c in enumerate(sc.contexts)}
    d = sc.num_outcomes
    if outcome_maps is None:
        outcome_maps = [tuple(range(d))] * nm
    for om in outcome_maps:
        if sorted(om) != list(range(d)):
            raise DomainError("outcome maps must be permutations")
    rows = [None] * sc.num_contexts
    for k, C in enumerate(sc.contexts):
        image = tuple(sorted(perm[m] for m in C))
        if image not in index:
            raise DomainError("permutation does not map contexts to contexts")
        k2 = index[image]
        pos2 = {m: t for t, m in enumerate(image)}
        row = [None] * len(B.table[k])
        for s_idx, s in enumerate(product(range(d), repeat=len(C))):
            s2 = [0] * len(C)
            for t, m in enumerate(C):
                s2[pos2[perm[m]]] = outcome_maps[m][s[t]]
            j = 0
            for o in s2:
                j = j * d + o
            row[j] = B.table[k][s_idx]
        rows[k2] = tuple(row)
    return Behavior(sc, tuple(rows))


def _post_process(B: Behavior, components) -> Behavior:
    sc = B.scenario
    d = sc.num_outcomes
    zero = Fraction(0) if B.exact and all(is_exact([w]) for w, _ in components) else 0.0
    rows = []
    for k, C in enumerate(sc.contexts):
        strings = list(product(range(d), repeat=len(C)))
        out = [zero] * len(strings)
        for w, kernels in components:
            if len(kernels) != len(sc.measurements):
                raise DomainError("one kernel per measurement is required")
            for a, s in enumerate(strings):
                pa = B.table[k][a]
                if not pa:
                    continue
                for b, s2 in enumerate(strings):
                    t = w * pa
                    for pos, m in enumerate(C):
                        t = t * kernels[m][s[pos]][s2[pos]]
                        if not t:
                            break
                    out[b] += t
        rows.append(tuple(out))
    return Behavior(sc, tuple(rows))


def apply_free_operation(B: Behavior, op: FreeOperation) -> Behavior:
    """Image of ``B`` under ``op``."""
    if op.kind == "relabeling":
        return _relabel(B, op.permutation, op.outcome_maps)
    if op.kind == "post-processing":
        return _post_process(B, op.components)
    sc = B.scenario
    acc = None
    for w, perm in op.components:
        R = _relabel(B, perm)
        flat = [w * v for v in R.flatten()]
        acc = flat if acc is None else [a + b for a, b in zip(acc, flat)]
    return Behavior.from_flat(sc, acc)


# --- convenience -------------------------------------------------------------------

MEASURES = ("cf", "rob", "d1", "d2", "dinf", "du", "dmax", "eu", "emax")


def quantify(B: Behavior, measure: str, norm: str = "l1", seed: int | None = None,
             robustness_method: str = "lp") -> QuantifierReport:
    """Dispatch on the short measure names used by the command line."""
    if measure == "cf":
        return contextual_fraction(B)
    if measure == "rob":
        return robustness(B, robustness_method)
    if measure in ("d1", "d2", "dinf"):
        return distance_quantifier(B, {"d1": "l1", "d2": "l2", "dinf": "linf"}[measure], "D")
    if measure == "du":
        return distance_quantifier(B, norm, "D_u")
    if measure == "dmax":
        return distance_quantifier(B, norm, "D_max")
    if measure == "eu":
        return entropic_quantifier(B, "E_u", seed=seed)
    if measure == "emax":
        return entropic_quantifier(B, "E_max", seed=seed)
    raise DomainError(f"unknown measure {measure!r}; choose from {MEASURES}")
