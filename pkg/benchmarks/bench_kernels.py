"""Compare the compiled kernels against the pure-Python fallback.

Run with ``python3 benchmarks/bench_kernels.py``.  Each kernel is timed on
the same inputs under both backends and the results are checked to agree.
"""
import argparse
import time

import numpy as np

from ctxgeom._kernels import backends
from ctxgeom.graphs import named_graph
from ctxgeom.scenario import CompatibilityScenario


def random_masks(n, density, rng):
    adj = [0] * n
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < density:
                adj[i] |= 1 << j
                adj[j] |= 1 << i
    return adj


def timed(fn, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def cases(rng):
    g40 = random_masks(40, 0.3, rng)
    w40 = [float(x) for x in rng.uniform(0.5, 2.0, 40)]
    g22 = random_masks(22, 0.2, rng)
    g30 = random_masks(30, 0.5, rng)
    prism = named_graph("prism", 8).masks
    yield "mwis n=40 p=0.3", lambda k: k.max_weight_independent_set(g40, w40)
    yield "mwis prism(8)", lambda k: k.max_weight_independent_set(prism, [1.0] * 16)
    yield "independent sets n=22 p=0.2", lambda k: len(k.independent_sets(g22, 1 << 22))
    yield "maximal cliques n=30 p=0.5", lambda k: len(k.maximal_cliques(g30))

    sc = CompatibilityScenario(tuple(f"M{i}" for i in range(6)),
                               tuple((i, (i + 1) % 6) for i in range(6)), (1, -1))
    V = sc.incidence_matrix().T.astype(float)
    p = V.T @ rng.dirichlet(np.ones(V.shape[0]))
    p = 0.7 * p + 0.3 * rng.dirichlet(np.ones(len(p)))
    G = np.ascontiguousarray(V @ V.T)
    b = np.ascontiguousarray(V @ p)

    def fw(k):
        lam = np.zeros(V.shape[0])
        lam[0] = 1.0
        lam, gap, it = k.fw_quadratic(G, b, lam, 1e-10, 200_000)
        return round(float(lam @ G @ lam - 2 * b @ lam), 8)

    yield "frank-wolfe QP 6-cycle", fw


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    ks = backends()
    if "cython" not in ks:
        print("compiled backend not available; timing the fallback only")
    rng = np.random.default_rng(args.seed)
    print(f"{'kernel':32s} " + " ".join(f"{name:>10s}" for name in ks) + "   speedup  agree")
    for label, fn in cases(rng):
        times, outs = [], []
        for k in ks.values():
            t, out = timed(lambda: fn(k), args.repeat)
            times.append(t)
            outs.append(out)
        speed = times[0] / times[-1] if len(times) > 1 and times[-1] > 0 else 1.0
        agree = all(o == outs[0] for o in outs)
        print(f"{label:32s} " + " ".join(f"{t * 1e3:9.2f}ms" for t in times)
              + f"  {speed:7.1f}x  {agree}")


if __name__ == "__main__":
    main()
