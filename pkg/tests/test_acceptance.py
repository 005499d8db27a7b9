"""Acceptance criteria 1-9.

Each criterion is one test; a summary with one PASS/FAIL line per criterion
is printed at the end of the module (``pytest tests/test_acceptance.py``) or
when the file is run as a script.
"""
import math
import sys
import time
from fractions import Fraction as F
from itertools import combinations_with_replacement, product

import numpy as np
import pytest

from ctxgeom.behaviors import (chsh_value, i3322_value, ncycle_scenario, pr_box, table_3322,
                               tsirelson_box)
from ctxgeom.exclusivity import (csw_bounds, evaluate_row, exclusivity_closed_form,
                                 exclusivity_distance, fixture_fig1, in_stab, odd_cycle_theta,
                                 random_eprinciple_vector, row_maximum)
from ctxgeom.graphs import named_graph, suspension
from ctxgeom.polytopes import (alpha, correlation_polytope, cut_hrep, cut_polytope,
                               elliptope_extremal_point, elliptope_membership_k4free,
                               expectation_vector, ncycle_facets_suspension, ncycle_functional,
                               phi, psi, suspension_cut_polytope)
from ctxgeom.quantifiers import (FreeOperation, apply_free_operation, contextual_fraction,
                                 distance_quantifier, entropic_quantifier, ncycle_closed_form,
                                 psi_space_quantifiers, robustness, scenario_automorphisms)
from ctxgeom.scenario import (Behavior, enumerate_classical_vertices, scenario_from_graph)
from ctxgeom.solvers.hull import membership_in_vpolytope
from ctxgeom.solvers.invariants import fractional_packing, independence_number
from ctxgeom.solvers.sdp import lovasz_theta

from conftest import random_graph, random_ns_behavior, random_relabeling

RESULTS = {}
AXIOM_TOL = 1e-8


def record(k, ok, detail):
    RESULTS[k] = (ok, detail)
    return ok, detail


# --- 1 ---------------------------------------------------------------------------

def criterion_1():
    G = named_graph("cycle", 5)
    a = independence_number(G).value
    th = lovasz_theta(G).value
    fp = fractional_packing(G).value
    ok = a == 2 and abs(th - math.sqrt(5)) <= 1e-5 and fp == F(5, 2) and isinstance(fp, F)
    return record(1, ok, f"alpha={a}, theta={th:.9f} (sqrt5={math.sqrt(5):.9f}), alpha*={fp}")


# --- 2 ---------------------------------------------------------------------------

def criterion_2():
    parts, ok = [], True
    for n in (5, 7, 9):
        th = lovasz_theta(named_graph("cycle", n)).value
        good = abs(th - odd_cycle_theta(n)) <= 1e-5
        ok &= good
        parts.append(f"theta(C{n})={th:.7f} vs {odd_cycle_theta(n):.7f} {'ok' if good else 'MISMATCH'}")
    targets = {"Y5": (named_graph("prism", 5), 5, 3.94427191), "M8": (named_graph("moebius-ladder", 8), 4,
                                                                      2 * math.sqrt(2))}
    for name, (H, n, want) in targets.items():
        th = lovasz_theta(H).value
        good = abs(th - want) <= 1e-5
        ok &= good
        # the expected numbers coincide with the correlator bound 2 theta - n
        parts.append(f"theta({name})={th:.7f} vs expected {want:.7f} {'ok' if good else 'MISMATCH'}"
                     f" (2*theta-{n}={2 * th - n:.7f})")
    return record(2, ok, "; ".join(parts))


# --- 3 ---------------------------------------------------------------------------

def _bisection_white_noise(B, steps=40):
    M = B.scenario.incidence_matrix()
    verts = [tuple(int(a) for a in M[:, j]) for j in range(M.shape[1])]
    u = [F(1, B.scenario.num_outcomes ** len(C)) for C in B.scenario.contexts
         for _ in range(B.scenario.num_outcomes ** len(C))]
    lo, hi = F(0), F(1)
    for _ in range(steps):
        mid = (lo + hi) / 2
        pt = [(1 - mid) * a + mid * b for a, b in zip(B.flatten(), u)]
        if membership_in_vpolytope(pt, verts).inside:
            hi = mid
        else:
            lo = mid
    return hi


def criterion_3():
    B = pr_box(4)
    x = expectation_vector(B)
    mem = membership_in_vpolytope(x, suspension_cut_polytope(named_graph("cycle", 4)))
    facets = ncycle_facets_suspension(4)
    proportional = False
    if not mem.inside:
        a, b = mem.hyperplane
        for row, rb in zip(facets.A, facets.b):
            if rb == 2:
                scale = b / rb
                proportional |= scale > 0 and all(ai == scale * ri for ai, ri in zip(a, row))
    cf = contextual_fraction(B).value
    r = {m: robustness(B, m).value for m in ("lp", "noncontextual", "white")}
    bis = _bisection_white_noise(B)
    ts = float(contextual_fraction(tsirelson_box(4)).value)
    sub = {
        "outside+facet": (not mem.inside) and proportional,
        "CF=1": cf == 1,
        "R=1/2": abs(float(r["lp"]) - 0.5) <= 1e-9 and abs(float(bis) - 0.5) <= 1e-9,
        "Tsirelson CF": abs(ts - (math.sqrt(2) - 1)) <= 1e-6,
    }
    detail = (f"hyperplane={tuple(str(v) for v in mem.hyperplane[0])}<= {mem.hyperplane[1]} "
              f"facet={proportional}; CF={cf}; R(default lp)={r['lp']}, R(noncontextual noise)="
              f"{r['noncontextual']}, R(white noise)={r['white']}, bisection(white)={float(bis):.12f}; "
              f"CF(Tsirelson)={ts:.9f}; failing: {[k for k, v in sub.items() if not v] or 'none'}")
    return record(3, all(sub.values()), detail)


# --- 4 ---------------------------------------------------------------------------

def criterion_4(per_n=100, seed=4):
    rng = np.random.default_rng(seed)
    worst, multi, tried = 0.0, 0, 0
    for n in (4, 5, 6):
        G = named_graph("cycle", n)
        got = 0
        while got < per_n:
            tried += 1
            B = random_ns_behavior(rng, n, pr_weight=float(rng.uniform(0.3, 1.0)))
            x = [float(v) for v in expectation_vector(B)]
            if sum(1 for s in ncycle_facets_suspension(n).slacks(x) if s < 0) > 1:
                multi += 1
                continue
            if ncycle_closed_form(x, n)["row"] is None:
                continue
            got += 1
            for norm in ("l1", "l2", "linf"):
                raw = float(psi_space_quantifiers(B, norm, "D").diagnostics["raw"])
                worst = max(worst, abs(raw - ncycle_closed_form(x, n, norm)["raw"]))
    worst_ex = 0.0
    for n in (5, 7):
        G = named_graph("cycle", n)
        got = 0
        while got < per_n:
            v = random_eprinciple_vector(G, rng)
            if sum(v.p) <= (n - 1) / 2:
                continue
            got += 1
            for norm in ("l1", "l2", "linf"):
                d = float(exclusivity_distance(v, norm).diagnostics["raw"])
                worst_ex = max(worst_ex, abs(d - exclusivity_closed_form(v, norm)["raw"]))
    ok = worst <= 1e-6 and worst_ex <= 1e-6
    return record(4, ok, f"cut polytope: max |solver - closed form| = {worst:.2e} over {3 * per_n} "
                         f"behaviors ({multi} multi-facet draws skipped); exclusivity C5/C7: "
                         f"{worst_ex:.2e} over {2 * per_n} points")


# --- 5 ---------------------------------------------------------------------------

def _sample_points(V, m, rng, count, denom=24):
    pts = []
    verts = [np.array([float(a) for a in v]) for v in V]
    for k in range(count):
        kind = k % 3
        if kind == 0:
            pts.append(tuple(F(int(a), denom) for a in rng.integers(-denom, denom + 1, m)))
            continue
        idx = rng.choice(len(V), size=min(4, len(V)), replace=False)
        w = [F(int(c), 1) for c in rng.integers(1, 6, len(idx))]
        s = sum(w)
        p = [sum(wi * V[i][t] for wi, i in zip(w, idx)) / s for t in range(m)]
        if kind == 2:
            # push outward by a small rational factor, landing near the boundary
            f = 1 + F(int(rng.integers(1, 8)), 40)
            p = [v * f for v in p]
        pts.append(tuple(p))
    return pts


def criterion_5(per_graph=500, seed=5):
    rng = np.random.default_rng(seed)
    graphs = [(f"C{n}", named_graph("cycle", n)) for n in (3, 4, 5, 6)]
    graphs += [(f"susp C{n}", suspension(named_graph("cycle", n))) for n in (3, 4, 5)]
    disagreements, rechecked, inside_total, lines = 0, 0, 0, []
    for name, G in graphs:
        V = cut_polytope(G, "pm1").vertices
        H = cut_hrep(G, "pm1")
        m = len(G.edges)
        inside = 0
        for p in _sample_points(V, m, rng, per_graph):
            h_in = H.contains(p)
            v_in = membership_in_vpolytope([float(v) for v in p], V, exact=False).inside
            near = min(abs(float(s)) for s in H.slacks(p)) < 1e-6
            if near or v_in != h_in:
                rechecked += 1
                v_in = membership_in_vpolytope(p, V, exact=True).inside
            disagreements += v_in != h_in
            inside += h_in
        inside_total += inside
        lines.append(f"{name}:{inside}/{per_graph} inside")
    # vertex correspondences, exact
    corr = True
    for name, G in graphs:
        if len(G.edges) <= 15:
            corr &= {psi(q, G) for q in correlation_polytope(G).vertices} == \
                set(suspension_cut_polytope(G).vertices)
            corr &= {alpha(x) for x in cut_polytope(G, "pm1").vertices} == \
                set(cut_polytope(G, "01").vertices)
    for n in (3, 4, 5, 6):
        G = named_graph("cycle", n)
        sc = scenario_from_graph(G)
        corr &= {phi(B, G) for B in enumerate_classical_vertices(sc)} == \
            set(correlation_polytope(G).vertices)
    ok = disagreements == 0 and corr
    return record(5, ok, f"{disagreements} H/V disagreements over {len(graphs) * per_graph} points "
                         f"({rechecked} re-solved exactly; {', '.join(lines)}); "
                         f"phi/psi/alpha vertex correspondences {'exact' if corr else 'BROKEN'}")


# --- 6 ---------------------------------------------------------------------------

def criterion_6():
    n = 5
    z = elliptope_extremal_point(n)
    member = elliptope_membership_k4free(named_graph("cycle", n), z)
    c = math.cos(math.pi / n)
    s = ncycle_functional(z)
    quantum = (15 * c - 5) / (1 + c)
    gap = s - quantum
    ok = member and abs(s - 5 * c) <= 1e-12 and s > quantum and abs(gap - 0.10081) <= 1e-5
    return record(6, ok, f"member={member}, sum={s:.15f} (5cos(pi/5)={5 * c:.15f}), "
                         f"quantum bound={quantum:.9f}, gap={gap:.9f}")


# --- 7 ---------------------------------------------------------------------------

def criterion_7():
    B = table_3322()
    chsh = chsh_value(B)
    i3 = i3322_value(B)
    fx = fixture_fig1()
    lhs = [evaluate_row(r, fx.vector.p) for r, _ in fx.rows]
    bounds = [b for _, b in fx.rows]
    mem = in_stab(fx.vector)
    ok = (chsh > 2 and isinstance(chsh, F) and i3 > 0 and lhs == [F(5, 3), F(11, 3)]
          and bounds == [1, 3] and not mem.inside)
    row1_max = row_maximum(fx.graph, fx.rows[0][0])
    return record(7, ok, f"3322: CHSH={chsh} (>2), I3322={i3} (>0, standard labeling gives "
                         f"{i3322_value(B, relabeled=False)}); 8-vertex fixture LHS={[str(v) for v in lhs]} vs "
                         f"bounds {bounds}; outside STAB={not mem.inside} with hyperplane "
                         f"{tuple(str(v) for v in mem.hyperplane[0])}<={mem.hyperplane[1]}; "
                         f"note: row 1 reaches {row1_max[0]} on STAB (stable set "
                         f"{tuple(i + 1 for i in row1_max[1])})")


# --- 8 ---------------------------------------------------------------------------

MEASURES = (["cf", "R-lp", "R-noncontextual", "R-white", "E_u", "E_max"]
            + [f"{v}-{n}" for v in ("D", "D_u", "D_max") for n in ("l1", "l2", "linf")])
POST_MONOTONE = ["cf", "R-lp", "R-noncontextual", "E_u", "E_max", "D-l1", "D_u-l1", "D_max-l1"]
CONVEX = ["cf", "E_u", "E_max"] + [f"{v}-{n}" for v in ("D", "D_u", "D_max") for n in ("l1", "l2", "linf")]


def measure_all(B, which=MEASURES):
    out = {}
    for k in which:
        if k == "cf":
            out[k] = float(contextual_fraction(B).value)
        elif k.startswith("R-"):
            out[k] = float(robustness(B, k[2:]).value)
        elif k.startswith("E_"):
            out[k] = float(entropic_quantifier(B, k).value)
        else:
            v, n = k.split("-")
            out[k] = float(distance_quantifier(B, n, v).value)
    return out


def rational_simplex(rng, k, denom=12):
    cuts = sorted(int(c) for c in rng.integers(0, denom + 1, k - 1))
    return [F(b - a, denom) for a, b in zip([0] + cuts, cuts + [denom])]


def rational_post_processing(rng, sc):
    d = sc.num_outcomes
    comps = []
    for w in rational_simplex(rng, 2, 6):
        if w == 0:
            continue
        kernels = [[rational_simplex(rng, d, 6) for _ in range(d)] for _ in sc.measurements]
        comps.append((w, kernels))
    return FreeOperation.post_processing(comps)


def rational_pre_processing(rng, sc):
    auts = scenario_automorphisms(sc)
    k = int(rng.integers(1, 4))
    idx = rng.choice(len(auts), size=k, replace=False)
    return FreeOperation.pre_processing([(w, auts[i]) for w, i in zip(rational_simplex(rng, k, 12), idx)
                                         if w > 0])


def classical_mixture(rng, sc, exact=True):
    verts = enumerate_classical_vertices(sc)
    idx = rng.choice(len(verts), size=min(4, len(verts)), replace=False)
    w = rational_simplex(rng, len(idx), 30) if exact else list(rng.dirichlet(np.ones(len(idx))))
    flat = [sum(wi * verts[i].flatten()[t] for wi, i in zip(w, idx))
            for t in range(len(verts[0].flatten()))]
    if not exact:
        flat = [float(v) for v in flat]
    return Behavior.from_flat(sc, flat)


def contextual_behavior(rng):
    return random_ns_behavior(rng, 4, denom=60, pr_weight=F(int(rng.integers(25, 61)), 60))


def criterion_8(faithful=200, ops=100, relabelings=50, mixtures=30, graphs=50, seed=8):
    rng = np.random.default_rng(seed)
    sub = {}
    # faithfulness
    worst = 0.0
    for sc in (ncycle_scenario(4), ncycle_scenario(5)):
        for k in range(faithful):
            B = classical_mixture(rng, sc, exact=k % 2 == 0)
            worst = max(worst, max(measure_all(B).values()))
    sub["faithfulness"] = (worst <= AXIOM_TOL, f"max value {worst:.1e} on {2 * faithful} classical mixtures")
    # relabeling invariance
    worst = 0.0
    seen = []
    for _ in range(relabelings):
        B = contextual_behavior(rng)
        before = measure_all(B)
        after = measure_all(apply_free_operation(B, random_relabeling(rng, B.scenario)))
        worst = max(worst, max(abs(after[k] - before[k]) for k in MEASURES))
        seen.append(before)
    sub["relabeling"] = (worst <= AXIOM_TOL, f"max change {worst:.1e} over {relabelings} relabelings")
    # post-processing
    worst = -math.inf
    for _ in range(ops):
        B = contextual_behavior(rng)
        before = measure_all(B, POST_MONOTONE)
        after = measure_all(apply_free_operation(B, rational_post_processing(rng, B.scenario)),
                            POST_MONOTONE)
        worst = max(worst, max(after[k] - before[k] for k in POST_MONOTONE))
    sub["post-processing"] = (worst <= AXIOM_TOL, f"max increase {worst:.1e} over {ops} operations "
                                                  f"({', '.join(POST_MONOTONE)})")
    # restricted pre-processing
    worst = -math.inf
    for _ in range(ops):
        B = contextual_behavior(rng)
        before = measure_all(B)
        after = measure_all(apply_free_operation(B, rational_pre_processing(rng, B.scenario)))
        worst = max(worst, max(after[k] - before[k] for k in MEASURES))
        seen.append(before)
    sub["pre-processing"] = (worst <= AXIOM_TOL, f"max increase {worst:.1e} over {ops} operations")
    # convexity on 3-mixtures
    worst, worst_r, worst_ratio = -math.inf, -math.inf, -math.inf
    rob = ["R-lp", "R-noncontextual", "R-white"]
    for _ in range(mixtures):
        Bs = [random_ns_behavior(rng, 4, denom=60, pr_weight=F(int(rng.integers(0, 61)), 60))
              for _ in range(3)]
        w = rational_simplex(rng, 3, 12)
        flat = [sum(wi * B.flatten()[t] for wi, B in zip(w, Bs)) for t in range(16)]
        mixed = measure_all(Behavior.from_flat(Bs[0].scenario, flat), CONVEX + rob)
        vals = [measure_all(B, CONVEX + rob) for B in Bs]
        for k in CONVEX:
            worst = max(worst, mixed[k] - sum(float(wi) * v[k] for wi, v in zip(w, vals)))
        for k in rob:
            worst_r = max(worst_r, mixed[k] - sum(float(wi) * v[k] for wi, v in zip(w, vals)))
            ratio = [v[k] / (1 - v[k]) for v in vals]
            worst_ratio = max(worst_ratio, mixed[k] / (1 - mixed[k])
                              - sum(float(wi) * r for wi, r in zip(w, ratio)))
    sub["convexity"] = (worst <= AXIOM_TOL, f"max excess {worst:.1e} over {mixtures} mixtures "
                                            f"(CF, D, D_u, D_max in all norms, E_u, E_max)")
    # robustness: exact counterexample to convexity
    pr = pr_box(4)
    C = enumerate_classical_vertices(pr.scenario)[0]
    half = Behavior.from_flat(pr.scenario, [(a + b) / 2 for a, b in zip(C.flatten(), pr.flatten())])
    counter = {m: (robustness(half, m).value, robustness(pr, m).value / 2) for m in ("lp", "noncontextual", "white")}
    r_convex = worst_r <= AXIOM_TOL and all(a <= b for a, b in counter.values())
    sub["robustness convexity"] = (r_convex, "random mixtures max excess {:.1e}; R((det+PR)/2) vs average: {}; "
                                   "w/(1-w) convex on mixtures (max excess {:.1e})".format(
                                       worst_r, ", ".join(f"{m} {a} > {b}" if a > b else f"{m} {a} <= {b}"
                                                          for m, (a, b) in counter.items()), worst_ratio))
    # sandwich
    bad = 0
    for _ in range(graphs):
        n = int(rng.integers(3, 13))
        G = random_graph(n, float(rng.uniform(0.15, 0.7)), rng)
        b = csw_bounds(G)
        bad += not (float(b.classical) <= b.quantum + 1e-6 and b.quantum <= float(b.eprinciple) + 1e-6)
    sub["sandwich"] = (bad == 0, f"{bad} violations on {graphs} random graphs with <= 12 vertices")
    # variant ordering
    worst = max(max(v[f"D_u-{n}"] - v[f"D_max-{n}"] for n in ("l1", "l2", "linf")) for v in seen)
    worst = max(worst, max(v["E_u"] - v["E_max"] for v in seen))
    sub["D_max>=D_u, E_max>=E_u"] = (worst <= AXIOM_TOL, f"max (D_u-D_max, E_u-E_max) {worst:.1e} "
                                                        f"on {len(seen)} behaviors")
    ok = all(v for v, _ in sub.values())
    detail = "; ".join(f"{k}: {'ok' if v else 'FAIL'} ({d})" for k, (v, d) in sub.items())
    return record(8, ok, detail)


# --- 9 ---------------------------------------------------------------------------

def _eu_objective(M, p, groups, lams):
    """Average KL in bits for each row of ``lams``."""
    Q = lams @ M.T
    out = np.zeros(len(lams))
    for g in groups:
        pg = p[g]
        mask = pg > 0
        with np.errstate(divide="ignore"):
            out += (pg[mask] * (np.log2(pg[mask]) - np.log2(Q[:, g][:, mask]))).sum(axis=1)
    return out / len(groups)


def criterion_9(steps=10_000, coarse=6):
    B = pr_box(4)
    sc = B.scenario
    M = sc.incidence_matrix().astype(float)
    p = np.array([float(v) for v in B.flatten()])
    off = sc.offsets
    groups = [list(range(off[k], off[k + 1])) for k in range(sc.num_contexts)]
    fw = entropic_quantifier(B, "E_u").value
    # symmetries of the PR box act on the 16 deterministic vertices; E_u is
    # convex and invariant, so a minimizer exists with weights constant on orbits
    verts = enumerate_classical_vertices(sc)
    index = {v: i for i, v in enumerate(verts)}
    stabilizer = []
    for perm in scenario_automorphisms(sc):
        for flips in product((0, 1), repeat=len(sc.measurements)):
            op = FreeOperation.relabeling(perm, [[1, 0] if f else [0, 1] for f in flips])
            if apply_free_operation(B, op) == B:
                stabilizer.append(op)
    orbits, seen = [], set()
    for i, v in enumerate(verts):
        if i not in seen:
            orb = sorted({index[apply_free_operation(v, op)] for op in stabilizer})
            seen.update(orb)
            orbits.append(orb)
    # dense grid over orbit weights (two orbits: a one-parameter family)
    if len(orbits) != 2:
        return record(9, False, f"unexpected orbit structure {orbits}")
    t = np.linspace(0.0, 1.0, steps + 1)
    lams = np.zeros((len(t), len(verts)))
    lams[:, orbits[0]] = (t / len(orbits[0]))[:, None]
    lams[:, orbits[1]] = ((1 - t) / len(orbits[1]))[:, None]
    grid = float(np.min(_eu_objective(M, p, groups, lams)))
    # coarse grid over the full 16-weight simplex never beats Frank-Wolfe
    pts = []
    for combo in combinations_with_replacement(range(len(verts)), coarse):
        lam = np.zeros(len(verts))
        for j in combo:
            lam[j] += 1.0 / coarse
        pts.append(lam)
    full = float(np.min(_eu_objective(M, p, groups, np.array(pts))))
    ok = abs(grid - fw) <= 1e-3 and full >= fw - 1e-9
    return record(9, ok, f"Frank-Wolfe E_u={fw:.9f}; orbit-grid oracle ({steps + 1} points, "
                         f"{len(stabilizer)} symmetries) {grid:.9f}; |diff|={abs(grid - fw):.1e}; "
                         f"full-simplex grid ({len(pts)} points) min {full:.6f} >= FW; "
                         f"log2(4/3)={math.log2(4 / 3):.9f}")


CRITERIA = {1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4, 5: criterion_5,
            6: criterion_6, 7: criterion_7, 8: criterion_8, 9: criterion_9}


def summary_lines():
    return [f"CRITERION {k}: {'PASS' if RESULTS[k][0] else 'FAIL'} - {RESULTS[k][1]}"
            for k in sorted(RESULTS)]


@pytest.fixture(scope="module", autouse=True)
def _print_summary(request):
    yield
    reporter = request.config.pluginmanager.get_plugin("terminalreporter")
    if reporter is not None and RESULTS:
        reporter.write_line("")
        reporter.write_line("acceptance summary")
        for line in summary_lines():
            reporter.write_line(line)


@pytest.mark.parametrize("k", sorted(CRITERIA))
def test_criterion(k):
    ok, detail = CRITERIA[k]()
    print(f"CRITERION {k}: {'PASS' if ok else 'FAIL'} - {detail}")
    assert ok, detail


if __name__ == "__main__":
    start = time.time()
    for k, fn in CRITERIA.items():
        t0 = time.time()
        ok, detail = fn()
        print(f"CRITERION {k}: {'PASS' if ok else 'FAIL'} - {detail} [{time.time() - t0:.1f}s]",
              flush=True)
    print(f"total {time.time() - start:.1f}s")
    sys.exit(0 if all(v for v, _ in RESULTS.values()) else 1)
