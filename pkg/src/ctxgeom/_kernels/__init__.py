"""Hot kernels with a compiled backend and a pure-Python fallback.

The compiled module is used when it imports cleanly.  Setting the environment
variable ``CTXGEOM_PURE_PYTHON=1`` forces the fallback.
"""
from __future__ import annotations

import os

from . import _pykernels

try:
    if os.environ.get("CTXGEOM_PURE_PYTHON", "") == "1":
        raise ImportError("pure Python backend requested")
    from . import _ckernels as _impl
    BACKEND = "cython"
except ImportError:
    _impl = _pykernels
    BACKEND = "python"

MAX_COMPILED_VERTICES = 64


def backends() -> dict:
    """Map backend name to module for every backend that imports."""
    out = {"python": _pykernels}
    try:
        from . import _ckernels
        out["cython"] = _ckernels
    except ImportError:
        pass
    return out


def _graph_impl(n: int):
    # the compiled bitset kernels use 64-bit masks
    return _impl if n <= MAX_COMPILED_VERTICES else _pykernels


def max_weight_independent_set(adj, weights):
    return _graph_impl(len(adj)).max_weight_independent_set(adj, weights)


def independent_sets(adj, limit):
    return _graph_impl(len(adj)).independent_sets(adj, limit)


def maximal_cliques(adj):
    return _graph_impl(len(adj)).maximal_cliques(adj)


def fw_quadratic(G, b, lam, tol, max_iter):
    return _impl.fw_quadratic(G, b, lam, tol, max_iter)
