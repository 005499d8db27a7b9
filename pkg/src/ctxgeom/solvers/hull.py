"""Optimization over convex hulls of finite point sets.

A point of ``conv(V)`` is written ``V^T lam`` with ``lam`` in the probability
simplex, so every problem here is a problem over mixture weights.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .. import _kernels
from .._numeric import is_exact, to_number
from ..errors import ConvergenceError, DomainError, SolverError
from .lp import LPProblem, solve_lp

QP_GAP_TOL = 1e-10
FW_MAX_ITER = 100_000


def _vertex_list(P) -> list:
    verts = list(P.vertices) if hasattr(P, "vertices") else [tuple(v) for v in P]
    if not verts:
        raise DomainError("empty vertex list")
    d = len(verts[0])
    if any(len(v) != d for v in verts):
        raise DomainError("vertices have different dimensions")
    return verts


def _check_dim(point, verts):
    if len(point) != len(verts[0]):
        raise DomainError(f"point has dimension {len(point)}, vertices {len(verts[0])}")


# --- membership -----------------------------------------------------------------

@dataclass
class MembershipResult:
    inside: bool
    weights: tuple | None = None
    hyperplane: tuple | None = None  # (a, b): a.x <= b on the hull
    violation: object = 0
    exact: bool = False


def membership_in_vpolytope(point: Sequence, P, exact: bool | None = None) -> MembershipResult:
    """Decide ``point in conv(P)``.

    Inside: convex weights reproducing the point.  Outside: a hyperplane
    ``a.x <= b`` valid on every vertex and violated by the point, taken from
    the separation program ``max a.p - b`` over ``|a_k| <= 1`` (the dual of
    the l1 distance program).
    """
    verts = _vertex_list(P)
    point = [to_number(v) for v in point]
    _check_dim(point, verts)
    if exact is None:
        exact = is_exact(point) and all(is_exact(v) for v in verts)
    m, d = len(verts), len(point)
    A = [[verts[j][k] for j in range(m)] for k in range(d)]
    A.append([1] * m)
    b = list(point) + [1]
    sol = solve_lp(LPProblem([0] * m, A, ["="] * (d + 1), b), exact=exact)
    if sol.optimal:
        return MembershipResult(True, tuple(sol.x), exact=exact)
    if sol.status != "infeasible":
        raise SolverError(f"membership program ended with status {sol.status}")
    return _separate(point, verts, exact)


def _separate(point, verts, exact) -> MembershipResult:
    d = len(point)
    # variables a_1..a_d, beta; maximize a.p - beta
    c = list(point) + [-1]
    A = [list(v) + [-1] for v in verts]
    bounds = [(-1, 1)] * d + [(None, None)]
    sol = solve_lp(LPProblem(c, A, ["<="] * len(verts), [0] * len(verts), "max", bounds), exact=exact)
    if not sol.optimal:
        raise SolverError(f"separation program ended with status {sol.status}")
    a = tuple(sol.x[:d])
    beta = sol.x[d]
    return MembershipResult(False, None, (a, beta), sol.objective, exact)


# --- LP-representable distances ---------------------------------------------------

@dataclass
class DistanceResult:
    distance: object
    nearest: tuple
    weights: tuple
    gap: float = 0.0
    iterations: int = 0
    exact: bool = False
    info: dict = field(default_factory=dict)


def lp_group_distance(point: Sequence, P, groups: Sequence[Sequence[int]] | None = None,
                      norm: str = "l1", aggregate: str = "sum",
                      group_weights: Sequence | None = None,
                      exact: bool | None = None) -> DistanceResult:
    """Minimize an aggregate of per-group l1 or l-infinity norms of ``point - V^T lam``.

    ``aggregate="sum"`` minimizes ``sum_g w_g ||r_g||``; ``"max"`` minimizes
    ``max_g ||r_g||``.  With one group this is the plain distance.
    """
    verts = _vertex_list(P)
    point = [to_number(v) for v in point]
    _check_dim(point, verts)
    if exact is None:
        exact = is_exact(point) and all(is_exact(v) for v in verts)
    d, m = len(point), len(verts)
    if groups is None:
        groups = [list(range(d))]
    G = len(groups)
    if group_weights is None:
        group_weights = [1] * G
    if norm not in ("l1", "linf"):
        raise DomainError("norm must be 'l1' or 'linf'")
    # variables: lam (m), then t (d for l1, G for linf), then z when aggregating by max
    nt = d if norm == "l1" else G
    nvar = m + nt + (1 if aggregate == "max" else 0)
    # (k, t) pairs with t >= |r_k|; groups may overlap, so linf needs one pair per membership
    if norm == "l1":
        pairs = [(k, m + k) for k in range(d)]
    else:
        pairs = [(k, m + g) for g, grp in enumerate(groups) for k in grp]
    rows, rel, rhs = [], [], []
    for k, tk in pairs:
        for sgn in (1, -1):
            row = [0] * nvar
            for j in range(m):
                if verts[j][k]:
                    row[j] = sgn * verts[j][k]
            row[tk] = 1
            rows.append(row)
            rel.append(">=")
            rhs.append(sgn * point[k])
    row = [0] * nvar
    for j in range(m):
        row[j] = 1
    rows.append(row)
    rel.append("=")
    rhs.append(1)
    c = [0] * nvar
    if aggregate == "sum":
        for g, grp in enumerate(groups):
            if norm == "l1":
                for k in grp:
                    c[m + k] += group_weights[g]
            else:
                c[m + g] = group_weights[g]
    elif aggregate == "max":
        c[-1] = 1
        for g, grp in enumerate(groups):
            row = [0] * nvar
            row[-1] = 1
            if norm == "l1":
                for k in grp:
                    row[m + k] = -1
            else:
                row[m + g] = -1
            rows.append(row)
            rel.append(">=")
            rhs.append(0)
    else:
        raise DomainError("aggregate must be 'sum' or 'max'")
    sol = solve_lp(LPProblem(c, rows, rel, rhs), exact=exact)
    if not sol.optimal:
        raise SolverError(f"distance program ended with status {sol.status}")
    lam = sol.x[:m]
    nearest = tuple(sum((lam[j] * verts[j][k] for j in range(m) if lam[j]), 0 * lam[0])
                    for k in range(d))
    return DistanceResult(sol.objective, nearest, tuple(lam), 0.0, sol.iterations, exact,
                          {"duals": sol.duals})


def lp_distance(point: Sequence, P, norm: str = "l1", exact: bool | None = None) -> DistanceResult:
    """l1 or l-infinity distance from ``point`` to ``conv(P)``."""
    return lp_group_distance(point, P, None, norm, "sum", None, exact)


# --- quadratic distance -----------------------------------------------------------

def _start_weights(V: np.ndarray, p: np.ndarray) -> np.ndarray:
    lam = np.zeros(V.shape[0])
    lam[int(np.argmin(((V - p) ** 2).sum(axis=1)))] = 1.0
    return lam


def _polish(G: np.ndarray, bvec: np.ndarray, lam: np.ndarray, fval: Callable) -> np.ndarray:
    """Solve the equality-constrained problem on the active face and keep it if better."""
    S = np.flatnonzero(lam > 1e-14)
    k = len(S)
    K = np.zeros((k + 1, k + 1))
    K[:k, :k] = 2.0 * G[np.ix_(S, S)]
    K[:k, k] = 1.0
    K[k, :k] = 1.0
    rhs = np.concatenate([2.0 * bvec[S], [1.0]])
    sol = np.linalg.lstsq(K, rhs, rcond=None)[0]
    mu = sol[:k]
    if np.any(mu < -1e-13):
        return lam
    mu = np.clip(mu, 0.0, None)
    mu /= mu.sum()
    cand = np.zeros_like(lam)
    cand[S] = mu
    return cand if fval(cand) <= fval(lam) else lam


def weighted_qp(V: np.ndarray, p: np.ndarray, w: np.ndarray | None = None,
                tol: float = QP_GAP_TOL, max_iter: int = FW_MAX_ITER,
                lam0: np.ndarray | None = None, strict: bool = True):
    """Minimize ``sum_k w_k (V^T lam - p)_k^2`` over the simplex.

    Returns ``(lam, value, gap, iterations)``.  Frank-Wolfe with away steps
    followed by an exact solve on the active face.  With ``strict=False`` the
    iteration cap returns the current iterate instead of raising.
    """
    V = np.asarray(V, dtype=float)
    p = np.asarray(p, dtype=float)
    sw = np.ones(V.shape[1]) if w is None else np.sqrt(np.asarray(w, dtype=float))
    Vw = V * sw
    pw = p * sw
    G = np.ascontiguousarray(Vw @ Vw.T)
    bvec = np.ascontiguousarray(Vw @ pw)

    def fval(lam):
        r = lam @ Vw - pw
        return float(r @ r)

    lam = _start_weights(Vw, pw) if lam0 is None else np.array(lam0, dtype=float)
    total = 0
    gap = np.inf
    for _ in range(4):
        lam, gap, it = _kernels.fw_quadratic(G, bvec, lam, tol, max_iter - total)
        total += it
        if gap > tol and total >= max_iter:
            if not strict:
                break
            raise ConvergenceError("Frank-Wolfe iteration cap reached", gap, total)
        polished = _polish(G, bvec, lam, fval)
        if polished is lam:
            break
        lam = polished
    grad = 2.0 * (G @ lam - bvec)
    gap = float(grad @ lam - grad.min())
    return lam, fval(lam), max(gap, 0.0), total


def qp_distance(point: Sequence, P, tol: float = QP_GAP_TOL,
                max_iter: int = FW_MAX_ITER) -> DistanceResult:
    """Euclidean distance from ``point`` to ``conv(P)``."""
    verts = _vertex_list(P)
    _check_dim(point, verts)
    V = np.array([[float(a) for a in v] for v in verts])
    p = np.array([float(a) for a in point])
    lam, val, gap, it = weighted_qp(V, p, None, tol, max_iter)
    nearest = lam @ V
    dist = float(np.linalg.norm(nearest - p))
    return DistanceResult(dist, tuple(nearest), tuple(lam), gap, it)


# --- general smooth objectives ---------------------------------------------------

class HullObjective:
    """Convex function of ``q = A lam``; subclasses give value and gradient in ``q``."""

    def value(self, q: np.ndarray) -> float:
        raise NotImplementedError

    def grad(self, q: np.ndarray) -> np.ndarray:
        raise NotImplementedError


class WeightedKL(HullObjective):
    """``sum_g w_g KL(p_g || q_g)`` with logarithm base ``base``."""

    def __init__(self, p: np.ndarray, groups: Sequence[Sequence[int]], weights: Sequence[float],
                 base: float = 2.0):
        self.p = np.asarray(p, dtype=float)
        coef = np.zeros_like(self.p)
        for g, idx in enumerate(groups):
            coef[list(idx)] = weights[g]
        self.groups = [np.asarray(g) for g in groups]
        self.weights = np.asarray(weights, dtype=float)
        self.support = self.p > 0
        self.coef = coef
        self.scale = 1.0 / np.log(base)
        ps = self.p[self.support]
        self.plogp = coef[self.support] * ps * np.log(ps)

    def per_group(self, q: np.ndarray) -> np.ndarray:
        out = np.empty(len(self.groups))
        for g, idx in enumerate(self.groups):
            pi = self.p[idx]
            m = pi > 0
            out[g] = float(np.sum(pi[m] * np.log(pi[m] / q[idx][m]))) * self.scale
        return out

    def value(self, q):
        s = self.support
        return float(np.sum(self.plogp - self.coef[s] * self.p[s] * np.log(q[s]))) * self.scale

    def grad(self, q):
        g = np.zeros_like(q)
        s = self.support
        g[s] = -self.coef[s] * self.p[s] / q[s] * self.scale
        return g


class SmoothedGroupNorm(HullObjective):
    """``sum_g w_g sqrt(||q_g - p_g||^2 + mu^2)``, a smooth stand-in for summed l2 norms."""

    def __init__(self, p: np.ndarray, groups, weights, mu: float):
        self.p = np.asarray(p, dtype=float)
        self.groups = [np.asarray(g) for g in groups]
        self.weights = np.asarray(weights, dtype=float)
        self.mu = mu

    def per_group(self, q):
        return np.array([float(np.linalg.norm(q[g] - self.p[g])) for g in self.groups])

    def value(self, q):
        r = self.per_group(q)
        return float(self.weights @ np.sqrt(r * r + self.mu ** 2))

    def grad(self, q):
        out = np.zeros_like(q)
        for w, g in zip(self.weights, self.groups):
            d = q[g] - self.p[g]
            out[g] = w * d / np.sqrt(d @ d + self.mu ** 2)
        return out


def _line_search(obj: HullObjective, q: np.ndarray, dq: np.ndarray, gmax: float) -> float:
    """Minimize ``obj(q + t dq)`` for ``t`` in ``[0, gmax]`` by bisection on the slope."""
    def slope(t):
        return float(obj.grad(q + t * dq) @ dq)

    if slope(gmax) <= 0:
        return gmax
    lo, hi = 0.0, gmax
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if slope(mid) > 0:
            hi = mid
        else:
            lo = mid
        if hi - lo < 1e-16:
            break
    return lo


def frank_wolfe(obj: HullObjective, A: np.ndarray, lam0: np.ndarray, tol: float = 1e-9,
                max_iter: int = FW_MAX_ITER):
    """Away-step Frank-Wolfe for ``min obj(A lam)`` over the simplex.

    ``A`` holds the atoms as columns.  Returns ``(lam, value, gap, iterations)``
    and raises :class:`ConvergenceError` at the iteration cap.
    """
    lam = np.array(lam0, dtype=float)
    q = A @ lam
    gap = np.inf
    for it in range(1, max_iter + 1):
        g = A.T @ obj.grad(q)
        s = int(np.argmin(g))
        lg = float(g @ lam)
        gap = lg - float(g[s])
        if gap <= tol:
            return lam, obj.value(q), max(gap, 0.0), it
        active = np.flatnonzero(lam > 0)
        a = int(active[np.argmax(g[active])])
        if gap >= g[a] - lg:
            dq = A[:, s] - q
            t = _line_search(obj, q, dq, 1.0)
            lam *= 1.0 - t
            lam[s] += t
        else:
            gmax = lam[a] / (1.0 - lam[a]) if lam[a] < 1.0 else 1e12
            dq = q - A[:, a]
            t = _line_search(obj, q, dq, gmax)
            lam *= 1.0 + t
            lam[a] -= t
            if t == gmax:
                lam[a] = 0.0
        lam[lam < 0] = 0.0
        lam /= lam.sum()
        q = A @ lam
    raise ConvergenceError("Frank-Wolfe iteration cap reached", float(gap), max_iter)


# --- max over groups by cutting planes -------------------------------------------

@dataclass
class MinimaxResult:
    value: float
    lower: float
    weights: np.ndarray
    pi: np.ndarray
    per_group: np.ndarray
    iterations: int


def minimize_max_over_groups(inner: Callable, per_group: Callable, K: int, tol: float = 1e-8,
                             max_rounds: int = 200, rel_tol: float = 1e-8,
                             accept_gap: float = 1e-6, stall: int = 10) -> MinimaxResult:
    """Minimize ``max_k f_k(lam)`` for convex ``f_k`` over the simplex.

    ``inner(pi)`` must return ``(lam, gap)`` approximately minimizing
    ``sum_k pi_k f_k(lam)`` with Frank-Wolfe gap ``gap``; ``per_group(lam)`` returns
    the vector ``f(lam)``.  Cutting planes on the concave dual function
    ``g(pi) = min_lam sum_k pi_k f_k(lam)`` supply the lower bound; the
    master LP's cut multipliers mix the stored ``lam`` into a primal point
    whose worst group value is the upper bound.

    Stops when the gap is below ``max(tol, rel_tol * value)``.  Kelley's
    method can stall near the optimum (the lower bound cannot beat the
    inner gap), so after ``stall`` rounds without the gap shrinking by 5%, or at the round
    cap, a gap below ``accept_gap`` is returned (``lower`` records it).
    """
    from scipy.optimize import linprog

    pi = np.full(K, 1.0 / K)
    lams, fvals = [], []
    lower = -np.inf
    best_val, best_lam, best_f = np.inf, None, None
    last_progress, mark = 0, np.inf
    for rnd in range(1, max_rounds + 1):
        lam, gap = inner(pi)
        f = np.asarray(per_group(lam), dtype=float)
        lams.append(lam)
        fvals.append(f)
        lower = max(lower, float(pi @ f) - gap)
        if f.max() < best_val:
            best_val, best_lam, best_f = float(f.max()), lam, f
        # master: max z s.t. z <= pi.f_j for all cuts, pi in simplex
        F = np.array(fvals)
        c = np.zeros(K + 1)
        c[-1] = -1.0
        A_ub = np.hstack([-F, np.ones((len(F), 1))])
        res = linprog(c, A_ub=A_ub, b_ub=np.zeros(len(F)),
                      A_eq=np.concatenate([np.ones(K), [0.0]])[None, :], b_eq=[1.0],
                      bounds=[(0, None)] * K + [(None, None)], method="highs")
        if res.status != 0:
            raise SolverError(f"cutting-plane master failed: {res.message}")
        mu = -np.asarray(res.ineqlin.marginals)
        mu = np.clip(mu, 0.0, None)
        if mu.sum() > 0:
            mu /= mu.sum()
            mix = sum(w * l for w, l in zip(mu, lams) if w > 0)
            fm = np.asarray(per_group(mix), dtype=float)
            if fm.max() < best_val:
                best_val, best_lam, best_f = float(fm.max()), mix, fm
        if best_val - lower <= max(tol, rel_tol * abs(best_val)):
            return MinimaxResult(best_val, lower, best_lam, pi, best_f, rnd)
        if best_val - lower < 0.95 * mark:
            last_progress, mark = rnd, best_val - lower
        elif rnd - last_progress >= stall and best_val - lower <= accept_gap:
            return MinimaxResult(best_val, lower, best_lam, pi, best_f, rnd)
        pi = np.clip(res.x[:K], 0.0, None)
        pi /= pi.sum()
    if best_val - lower <= accept_gap:
        return MinimaxResult(best_val, lower, best_lam, pi, best_f, max_rounds)
    raise ConvergenceError("cutting-plane iteration cap reached", best_val - lower, max_rounds)
