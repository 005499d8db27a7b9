import os
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from ctxgeom.graphs import Graph

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", deadline=None, max_examples=15,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


def random_graph(n, density, rng):
    es = [(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < density]
    return Graph(n, tuple(es))


def random_weights_on_simplex(m, rng, denom=None, support=None):
    """Random probability vector; rational with the given denominator if asked."""
    idx = np.arange(m) if support is None else rng.choice(m, size=min(support, m), replace=False)
    if denom is None:
        w = np.zeros(m)
        w[idx] = rng.dirichlet(np.ones(len(idx)))
        return list(w)
    cuts = sorted(rng.integers(0, denom + 1, size=len(idx) - 1))
    parts = np.diff([0] + cuts + [denom])
    w = [Fraction(0)] * m
    for i, p in zip(idx, parts):
        w[i] = Fraction(int(p), denom)
    return w


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pr_variants(n=4):
    """All extremal n-cycle correlator boxes with an odd number of anticorrelated edges."""
    from itertools import product as iproduct
    from ctxgeom.behaviors import correlator_behavior, ncycle_scenario
    sc = ncycle_scenario(n)
    out = []
    for signs in iproduct((1, -1), repeat=n):
        if signs.count(-1) % 2:
            out.append(correlator_behavior(sc, list(signs)))
    return out


def random_ns_behavior(rng, n=4, denom=None, pr_weight=None):
    """Random non-disturbing n-cycle behavior: mixture of classical vertices and PR variants."""
    from ctxgeom.behaviors import ncycle_scenario
    from ctxgeom.scenario import Behavior, enumerate_classical_vertices
    sc = ncycle_scenario(n)
    pool = enumerate_classical_vertices(sc) + pr_variants(n)
    k = 4
    idx = rng.choice(len(pool), size=k, replace=False)
    if pr_weight is not None:
        idx[0] = len(pool) - 1 - int(rng.integers(0, 2 ** (n - 1)))
    w = random_weights_on_simplex(k, rng, denom)
    if pr_weight is not None:
        w = [pr_weight] + [(1 - pr_weight) * x for x in random_weights_on_simplex(k - 1, rng, denom)]
    vec = None
    for wi, i in zip(w, idx):
        f = [wi * v for v in pool[i].flatten()]
        vec = f if vec is None else [a + b for a, b in zip(vec, f)]
    if denom is None:
        vec = [float(v) for v in vec]
        # renormalize per context against rounding
        off = sc.offsets
        for c in range(sc.num_contexts):
            s = sum(vec[off[c]:off[c + 1]])
            vec[off[c]:off[c + 1]] = [v / s for v in vec[off[c]:off[c + 1]]]
    return Behavior.from_flat(sc, vec)


def random_post_processing(rng, scenario, components=2):
    from ctxgeom.quantifiers import FreeOperation
    d = scenario.num_outcomes
    comps = []
    ws = rng.dirichlet(np.ones(components))
    for w in ws:
        kernels = []
        for _ in scenario.measurements:
            K = rng.dirichlet(np.ones(d), size=d)
            kernels.append([list(r) for r in K])
        comps.append((float(w), kernels))
    # make weights sum to one exactly in floating point
    total = sum(w for w, _ in comps)
    comps = [(w / total, k) for w, k in comps]
    return FreeOperation.post_processing(comps)


def random_pre_processing(rng, scenario):
    from ctxgeom.quantifiers import FreeOperation, scenario_automorphisms
    auts = scenario_automorphisms(scenario)
    k = int(rng.integers(1, 4))
    idx = rng.choice(len(auts), size=k, replace=False)
    ws = rng.dirichlet(np.ones(k))
    ws = ws / ws.sum()
    return FreeOperation.pre_processing([(float(w), auts[i]) for w, i in zip(ws, idx)])


def random_relabeling(rng, scenario):
    from ctxgeom.quantifiers import FreeOperation, scenario_automorphisms
    auts = scenario_automorphisms(scenario)
    perm = auts[int(rng.integers(len(auts)))]
    d = scenario.num_outcomes
    maps = [list(rng.permutation(d)) for _ in scenario.measurements]
    return FreeOperation.relabeling(perm, maps)
