"""First-order SDP solver and the vertex-weighted Lovász number.

The solver is the alternating-direction augmented Lagrangian method on the
dual, for problems

    min <C, X>  s.t.  <A_i, X> = b_i,  X PSD

with an over-relaxed primal update.  Problems are small (n <= 32), so the
constraint operator is kept as a dense ``m x n^2`` matrix.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..errors import ConvergenceError, DomainError
from ..graphs import Graph

MAX_THETA_VERTICES = 32


@dataclass
class SDPProblem:
    C: np.ndarray
    constraints: list  # (symmetric matrix A_i, b_i)

    def __post_init__(self):
        self.C = np.asarray(self.C, dtype=float)
        n = self.C.shape[0]
        if self.C.shape != (n, n) or not np.allclose(self.C, self.C.T):
            raise DomainError("objective must be a symmetric square matrix")
        for A, _ in self.constraints:
            A = np.asarray(A)
            if A.shape != (n, n) or not np.allclose(A, A.T):
                raise DomainError("constraint matrices must be symmetric of the objective's size")

    @property
    def n(self) -> int:
        return self.C.shape[0]


@dataclass
class SDPSolution:
    X: np.ndarray
    y: np.ndarray
    S: np.ndarray
    primal_objective: float
    dual_objective: float
    primal_residual: float
    dual_residual: float
    iterations: int
    info: dict = field(default_factory=dict)


def _psd_split(V: np.ndarray):
    w, Q = np.linalg.eigh(V)
    pos = w > 0
    Vp = (Q[:, pos] * w[pos]) @ Q[:, pos].T
    return Vp, V - Vp


def solve_sdp(problem: SDPProblem, tol: float = 1e-9, max_iter: int = 50_000,
              relax: float = 1.6, mu: float = 1.0, callback=None) -> SDPSolution:
    """Run the ADMM until both scaled residuals fall below ``tol``.

    ``callback(X, y, S)`` may return True to stop early (used for certified
    stopping rules).  Raises :class:`ConvergenceError` at the iteration cap.
    """
    n = problem.n
    C = problem.C
    Amat = np.array([np.asarray(A, dtype=float).ravel() for A, _ in problem.constraints])
    b = np.array([float(bi) for _, bi in problem.constraints])
    AAT = Amat @ Amat.T
    L = np.linalg.cholesky(AAT)

    def A_op(X):
        return Amat @ X.ravel()

    def At_op(y):
        return (Amat.T @ y).reshape(n, n)

    def solve_aat(r):
        return np.linalg.solve(L.T, np.linalg.solve(L, r))

    X = np.eye(n) / n
    S = np.zeros((n, n))
    bnorm = 1.0 + np.linalg.norm(b)
    cnorm = 1.0 + np.linalg.norm(C)
    y = np.zeros(len(b))
    rp = rd = np.inf
    for it in range(1, max_iter + 1):
        y = -solve_aat(mu * (A_op(X) - b) + A_op(S - C))
        V = C - At_op(y) - mu * X
        V = 0.5 * (V + V.T)
        S, Vn = _psd_split(V)
        X_new = -Vn / mu
        X = (1.0 - relax) * X + relax * X_new
        X = 0.5 * (X + X.T)
        rp = np.linalg.norm(A_op(X) - b) / bnorm
        rd = np.linalg.norm(C - At_op(y) - S) / cnorm
        if callback is not None and it % 10 == 0 and callback(X, y, S):
            break
        if rp < tol and rd < tol:
            break
        # mu weighs dual feasibility against primal; keep the residuals balanced
        if it % 50 == 0:
            if rp > 10 * rd and mu < 1e4:
                mu *= 2.0
            elif rd > 10 * rp and mu > 1e-4:
                mu *= 0.5
    else:
        err = ConvergenceError(f"SDP did not converge (primal {rp:.2e}, dual {rd:.2e})",
                               max(rp, rd), max_iter)
        err.partial = SDPSolution(X, y, S, float(np.sum(C * X)), float(b @ y),
                                  float(rp), float(rd), max_iter)
        raise err
    return SDPSolution(X, y, S, float(np.sum(C * X)), float(b @ y), float(rp), float(rd), it)


@dataclass
class ThetaResult:
    value: float
    lower: float
    upper: float
    X: np.ndarray
    edge_multipliers: np.ndarray
    iterations: int
    dual_residual: float


def theta_sdp(G: Graph, weights: Sequence | None = None) -> SDPProblem:
    """``min <-sqrt(g) sqrt(g)^T, X>`` with ``tr X = 1`` and ``X_ij = 0`` on edges."""
    n = G.n
    w = np.array([float(x) for x in (weights if weights is not None else G.vertex_weights())])
    s = np.sqrt(w)
    cons = [(np.eye(n), 1.0)]
    for i, j in G.edges:
        E = np.zeros((n, n))
        E[i, j] = E[j, i] = 1.0 / np.sqrt(2.0)
        cons.append((E, 0.0))
    return SDPProblem(-np.outer(s, s), cons)


def _theta_bounds(W: np.ndarray, G: Graph, X: np.ndarray, y: np.ndarray):
    n = G.n
    # upper bound: any edge multipliers give theta <= lambda_max(W + sum y_e A_e)
    M = W.copy()
    for t, (i, j) in enumerate(G.edges):
        M[i, j] += y[1 + t] / np.sqrt(2.0)
        M[j, i] += y[1 + t] / np.sqrt(2.0)
    upper = float(np.linalg.eigvalsh(M)[-1])
    # lower bound: repair X into a feasible point and evaluate it
    Z = 0.5 * (X + X.T)
    for i, j in G.edges:
        Z[i, j] = Z[j, i] = 0.0
    lmin = float(np.linalg.eigvalsh(Z)[0])
    if lmin < 0:
        Z = Z - lmin * np.eye(n)
    tr = float(np.trace(Z))
    lower = float(np.sum(W * Z) / tr) if tr > 0 else 0.0
    return lower, upper


def lovasz_theta(G: Graph, weights: Sequence | None = None, tol: float = 1e-8,
                 residual_tol: float = 1e-9, max_iter: int = 20_000) -> ThetaResult:
    """Vertex-weighted Lovász number with a certified bracket ``[lower, upper]``.

    ``upper`` comes from dual multipliers and ``lower`` from a repaired primal
    matrix; both are valid bounds whatever the iterate.  The run stops when
    the bracket is narrower than ``tol`` or both ADMM residuals are below
    ``residual_tol``.  ``value`` is ``upper``, which converges much faster
    than the repaired lower bound on degenerate instances.  Residuals above
    1e-6 at the iteration cap raise :class:`ConvergenceError`.
    """
    if G.n > MAX_THETA_VERTICES:
        raise DomainError(f"theta is limited to {MAX_THETA_VERTICES} vertices")
    if G.n == 0:
        return ThetaResult(0.0, 0.0, 0.0, np.zeros((0, 0)), np.zeros(0), 0, 0.0)
    prob = theta_sdp(G, weights)
    W = -prob.C

    def stop(X, y, S):
        lo, up = _theta_bounds(W, G, X, y)
        return up - lo < tol

    try:
        sol = solve_sdp(prob, tol=residual_tol, max_iter=max_iter, callback=stop)
    except ConvergenceError as exc:
        if exc.gap > 1e-6:
            raise
        sol = exc.partial
    lo, up = _theta_bounds(W, G, sol.X, sol.y)
    return ThetaResult(up, lo, up, sol.X, sol.y[1:], sol.iterations, sol.dual_residual)
