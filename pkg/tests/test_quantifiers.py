import math
from fractions import Fraction as F

import cvxpy as cp
import numpy as np
import pytest

from ctxgeom.behaviors import isotropic_box, ncycle_scenario, pr_box, tsirelson_box
from ctxgeom.errors import DomainError, NotApplicableError
from ctxgeom.graphs import named_graph
from ctxgeom.polytopes import expectation_vector, ncycle_facets_pm1, suspension_cut_polytope
from ctxgeom.quantifiers import (FreeOperation, apply_free_operation, contextual_fraction,
                                 distance_quantifier, entropic_quantifier, ncycle_closed_form,
                                 psi_space_quantifiers, quantify, robustness,
                                 scenario_automorphisms)
from ctxgeom.scenario import Behavior, enumerate_classical_vertices, is_nondisturbing
from ctxgeom.solvers.hull import membership_in_vpolytope

from conftest import (random_ns_behavior, random_post_processing, random_pre_processing,
                      random_relabeling)


def cvx_distance(B, norm, variant):
    M = B.scenario.incidence_matrix().astype(float)
    p = B.as_array()
    lam = cp.Variable(M.shape[1], nonneg=True)
    r = M @ lam - p
    o = {"l1": 1, "l2": 2, "linf": "inf"}[norm]
    off = B.scenario.offsets
    N = B.scenario.num_contexts
    if variant == "D":
        obj = cp.norm(r, o)
    else:
        terms = cp.hstack([cp.norm(r[off[k]:off[k + 1]], o) for k in range(N)])
        obj = cp.sum(terms) / N if variant == "D_u" else cp.max(terms)
    prob = cp.Problem(cp.Minimize(obj), [cp.sum(lam) == 1])
    prob.solve(solver="CLARABEL")
    return prob.value


def test_pr_box_lp_quantifiers():
    B = pr_box(4)
    assert contextual_fraction(B).value == 1
    assert robustness(B, "lp").value == F(1, 4)
    assert robustness(B, "noncontextual").value == F(1, 3)
    assert robustness(B, "white").value == F(1, 2)


def test_white_noise_robustness_matches_bisection():
    B = pr_box(4)
    M = B.scenario.incidence_matrix()
    verts = [tuple(int(a) for a in M[:, j]) for j in range(M.shape[1])]
    u = [F(1, 4)] * 16
    lo, hi = F(0), F(1)
    for _ in range(30):
        mid = (lo + hi) / 2
        pt = [(1 - mid) * a + mid * b for a, b in zip(B.flatten(), u)]
        if membership_in_vpolytope(pt, verts).inside:
            hi = mid
        else:
            lo = mid
    assert float(hi) == pytest.approx(float(robustness(B, "white").value), abs=1e-8)


def test_robustness_lp_certificate():
    B = pr_box(4)
    rep = robustness(B, "lp")
    b = rep.certificate["supernormalized_section"]
    assert sum(b) == F(4, 3)
    M = B.scenario.incidence_matrix()
    assert all(sum(int(M[i, j]) * b[j] for j in range(len(b))) >= B.flatten()[i]
               for i in range(M.shape[0]))


def test_robustness_is_not_convex_in_the_mixing_weight():
    # deterministic vertex and PR box mixed half and half
    pr = pr_box(4)
    C = enumerate_classical_vertices(pr.scenario)[0]
    mix = Behavior.from_flat(pr.scenario, [(a + b) / 2 for a, b in zip(C.flatten(), pr.flatten())])
    for method, mixed, avg in (("lp", F(1, 7), F(1, 8)), ("noncontextual", F(1, 5), F(1, 6)),
                               ("white", F(1, 3), F(1, 4))):
        assert robustness(mix, method).value == mixed
        assert (robustness(C, method).value + robustness(pr, method).value) / 2 == avg
        # the noise-to-signal ratio w / (1 - w) is convex
        ratio = lambda w: w / (1 - w)
        assert ratio(mixed) <= (ratio(F(0)) + ratio(robustness(pr, method).value)) / 2


def test_tsirelson_and_isotropic_cf():
    assert float(contextual_fraction(tsirelson_box(4)).value) == pytest.approx(math.sqrt(2) - 1, abs=1e-9)
    assert contextual_fraction(isotropic_box(4, F(3, 4))).value == F(1, 2)
    assert contextual_fraction(isotropic_box(4, F(1, 2))).value == 0


def test_classical_behaviors_score_zero(rng):
    sc = ncycle_scenario(4)
    for B in enumerate_classical_vertices(sc)[:3]:
        for m in ("cf", "rob", "d1", "d2", "dinf", "du", "dmax", "eu", "emax"):
            rep = quantify(B, m)
            assert rep.value == 0


def test_disturbing_behavior_rejected():
    B = pr_box(4)
    rows = list(B.table)
    rows[0] = (F(1, 2), F(1, 4), 0, F(1, 4))
    D = Behavior(B.scenario, tuple(rows))
    assert not is_nondisturbing(D)
    with pytest.raises(DomainError):
        contextual_fraction(D)


@pytest.mark.parametrize("norm", ["l1", "l2", "linf"])
@pytest.mark.parametrize("variant", ["D", "D_u", "D_max"])
def test_distances_match_cvxpy(rng, norm, variant):
    for _ in range(3):
        B = random_ns_behavior(rng, pr_weight=float(rng.uniform(0.3, 0.9)))
        ours = float(distance_quantifier(B, norm, variant).value)
        assert ours == pytest.approx(cvx_distance(B, norm, variant), abs=2e-6)


def test_pr_box_distances_exact():
    B = pr_box(4)
    assert distance_quantifier(B, "l1", "D").value == 2
    assert distance_quantifier(B, "linf", "D").value == F(1, 8)
    assert distance_quantifier(B, "l2", "D").value == pytest.approx(0.5, abs=1e-9)


def cvx_psi(x, G, norm, variant):
    P = suspension_cut_polytope(G)
    A = np.array(P.vertices, dtype=float).T
    lam = cp.Variable(A.shape[1], nonneg=True)
    r = A @ lam - np.array([float(v) for v in x])
    o = {"l1": 1, "l2": 2, "linf": "inf"}[norm]
    n = G.n
    groups = [[i, j, n + t] for t, (i, j) in enumerate(G.edges)]
    if variant == "D":
        obj = cp.norm(r, o)
    else:
        terms = cp.hstack([cp.norm(cp.hstack([r[k] for k in g]), o) for g in groups])
        obj = cp.sum(terms) if variant == "D_u" else cp.max(terms)
    prob = cp.Problem(cp.Minimize(obj), [cp.sum(lam) == 1])
    prob.solve(solver="CLARABEL")
    return prob.value


@pytest.mark.parametrize("norm", ["l1", "l2", "linf"])
@pytest.mark.parametrize("variant", ["D", "D_u", "D_max"])
def test_psi_space_raw_matches_cvxpy(rng, norm, variant):
    G = named_graph("cycle", 4)
    for B in (pr_box(4), random_ns_behavior(rng, pr_weight=0.7)):
        rep = psi_space_quantifiers(B, norm, variant)
        x = expectation_vector(B)
        assert float(rep.diagnostics["raw"]) == pytest.approx(cvx_psi(x, G, norm, variant), abs=2e-6)
        assert rep.diagnostics["normalized"] == pytest.approx(float(rep.diagnostics["raw"]) / 4)


def test_psi_space_pr_values():
    B = pr_box(4)
    r = psi_space_quantifiers(B, "l1", "D")
    assert r.diagnostics["raw"] == 2 and r.value == F(1, 2)
    r = psi_space_quantifiers(B, "l2", "D")
    assert r.diagnostics["raw"] == pytest.approx(1.0) and r.value == pytest.approx(0.25)
    r = psi_space_quantifiers(B, "linf", "D")
    assert r.diagnostics["raw"] == F(1, 2)
    # alpha space halves every coordinate difference
    assert psi_space_quantifiers(B, "l1", "D", "alpha").diagnostics["raw"] == 1


def facet_centroid(n, row):
    P = suspension_cut_polytope(named_graph("cycle", n))
    tight = [v for v in P.vertices if sum(a * x for a, x in zip(row, v[n:])) == n - 2]
    return np.mean(np.array(tight, dtype=float), axis=0)


@pytest.mark.parametrize("n", [4, 5, 6])
def test_closed_form_equals_distance_off_a_facet(n):
    G = named_graph("cycle", n)
    H = ncycle_facets_pm1(n)
    row = next(r for r in H.A if sum(1 for a in r if a < 0) == 1)
    c = facet_centroid(n, row)
    a = np.array(row, dtype=float)
    for norm, d in (("l2", a), ("linf", a), ("l1", np.eye(n)[0] * a[0])):
        x = c.copy()
        x[n:] += 0.2 * d
        cf = ncycle_closed_form(list(x), n, norm)
        rep = psi_space_quantifiers(list(x), norm, "D", "psi", G)
        assert float(rep.diagnostics["raw"]) == pytest.approx(cf["raw"], abs=1e-7)
        assert cf["value"] == pytest.approx(cf["raw"] / n)


def test_closed_form_is_a_lower_bound(rng):
    n = 5
    G = named_graph("cycle", n)
    for _ in range(10):
        x = list(rng.uniform(-0.3, 0.3, n)) + list(rng.uniform(-1, 1, n))
        try:
            cf = ncycle_closed_form(x, n, "l2")
        except NotApplicableError:
            continue
        rep = psi_space_quantifiers(x, "l2", "D", "psi", G)
        assert cf["raw"] <= float(rep.diagnostics["raw"]) + 1e-8


def test_closed_form_edge_cases():
    assert ncycle_closed_form([0.0] * 4, 4)["value"] == 0.0
    with pytest.raises(NotApplicableError):
        ncycle_closed_form([2, 2, 2, 2], 4)
    with pytest.raises(DomainError):
        ncycle_closed_form([0.0] * 3, 4)


def test_entropic_pr_value():
    B = pr_box(4)
    eu = entropic_quantifier(B, "E_u")
    assert eu.value == pytest.approx(math.log2(4 / 3), abs=1e-6)
    em = entropic_quantifier(B, "E_max")
    assert em.value >= eu.value - 1e-8
    assert em.value == pytest.approx(math.log2(4 / 3), abs=1e-6)


def test_entropic_matches_cvxpy(rng):
    for _ in range(3):
        B = random_ns_behavior(rng, pr_weight=0.6)
        M = B.scenario.incidence_matrix().astype(float)
        p = B.as_array()
        lam = cp.Variable(M.shape[1], nonneg=True)
        obj = cp.sum(cp.rel_entr(p, M @ lam)) / (B.scenario.num_contexts * math.log(2))
        prob = cp.Problem(cp.Minimize(obj), [cp.sum(lam) == 1])
        prob.solve(solver="CLARABEL")
        assert entropic_quantifier(B, "E_u").value == pytest.approx(prob.value, abs=1e-5)


def test_scenario_automorphisms_of_square():
    sc = ncycle_scenario(4)
    auts = scenario_automorphisms(sc)
    assert len(auts) == 8


def test_relabeling_rules():
    B = pr_box(4)
    # flipping the outcome of M0 turns the anticorrelated closing edge into a correlated one
    op = FreeOperation.relabeling([0, 1, 2, 3], [[1, 0], [0, 1], [0, 1], [0, 1]])
    R = apply_free_operation(B, op)
    assert R.p(0, (1, 1)) == 0 and R.p(0, (1, -1)) == F(1, 2)
    assert R.p(3, (1, -1)) == 0 and R.p(3, (1, 1)) == F(1, 2)
    with pytest.raises(DomainError):
        apply_free_operation(B, FreeOperation.relabeling([1, 0, 2, 3]))


def test_free_operation_validation():
    with pytest.raises(DomainError):
        FreeOperation.post_processing([(0.5, [[[1, 0], [0, 1]]] * 4)])
    with pytest.raises(DomainError):
        FreeOperation.post_processing([(1, [[[0.5, 0.6], [0, 1]]] * 4)])
    with pytest.raises(DomainError):
        FreeOperation.pre_processing([(0.3, (0, 1, 2, 3))])


def test_free_operations_preserve_classicality(rng):
    sc = ncycle_scenario(4)
    C = enumerate_classical_vertices(sc)[5]
    for gen in (random_post_processing, random_pre_processing, random_relabeling):
        op = gen(rng, sc)
        out = apply_free_operation(C, op)
        assert is_nondisturbing(out)
        assert contextual_fraction(out).value <= 1e-9


def test_post_processing_identity_and_flip_equal_relabeling():
    B = pr_box(4)
    ident = [[[1, 0], [0, 1]]] * 4
    assert apply_free_operation(B, FreeOperation.local_post_processing(ident)) == B
    flip = [[[0, 1], [1, 0]]] + [[[1, 0], [0, 1]]] * 3
    a = apply_free_operation(B, FreeOperation.local_post_processing(flip))
    b = apply_free_operation(B, FreeOperation.relabeling([0, 1, 2, 3], [[1, 0], [0, 1], [0, 1], [0, 1]]))
    assert a == b


def test_report_json():
    rep = contextual_fraction(pr_box(4))
    doc = rep.to_json()
    assert doc["value"] == 1 and doc["value_float"] == 1.0


def _float(B):
    return Behavior.from_flat(B.scenario, [float(v) for v in B.flatten()])


def test_juxtaposition_bounds():
    from ctxgeom.scenario import juxtapose
    rng = np.random.default_rng(11)
    pairs = [(pr_box(4), pr_box(5)),
             (random_ns_behavior(rng, 4, pr_weight=0.9), random_ns_behavior(rng, 5, pr_weight=0.8))]
    for B1, B2 in pairs:
        B1, B2 = _float(B1), _float(B2)
        J = juxtapose(B1, B2)
        N1, N2 = B1.scenario.num_contexts, B2.scenario.num_contexts
        d = lambda B, n, v: float(distance_quantifier(B, n, v).value)
        assert d(J, "l1", "D") == pytest.approx(d(B1, "l1", "D") + d(B2, "l1", "D"), abs=1e-7)
        assert d(J, "linf", "D") <= max(d(B1, "linf", "D"), d(B2, "linf", "D")) + 1e-7
        for norm in ("l1", "l2", "linf"):
            assert d(J, norm, "D_max") <= max(d(B1, norm, "D_max"), d(B2, norm, "D_max")) + 1e-7
            # the classical set of a juxtaposition is a product, so D_u averages exactly
            avg = (N1 * d(B1, norm, "D_u") + N2 * d(B2, norm, "D_u")) / (N1 + N2)
            assert d(J, norm, "D_u") == pytest.approx(avg, abs=1e-6)
        assert float(contextual_fraction(J).value) <= 1 + 1e-9


def test_juxtaposition_bound_mixing_d_and_du():
    # D_u(B1 & B2) <= D(B1)/N2 + D(B2)/N1 holds for l1 but not for l2 or l-infinity
    from ctxgeom.scenario import juxtapose
    B1, B2 = _float(pr_box(4)), _float(pr_box(5))
    J = juxtapose(B1, B2)
    N1, N2 = 4, 5
    out = {}
    for norm in ("l1", "l2", "linf"):
        du = float(distance_quantifier(J, norm, "D_u").value)
        bound = (float(distance_quantifier(B1, norm, "D").value) / N2
                 + float(distance_quantifier(B2, norm, "D").value) / N1)
        out[norm] = (du, bound)
    assert out["l1"][0] <= out["l1"][1]
    assert out["l2"][0] == pytest.approx(2 / 9, abs=1e-6) and out["l2"][1] < 2 / 9
    assert out["linf"][0] == pytest.approx(1 / 9, abs=1e-9) and out["linf"][1] == pytest.approx(0.05)


def test_tensor_subadditivity():
    from ctxgeom.scenario import tensor
    rng = np.random.default_rng(12)
    B1 = _float(random_ns_behavior(rng, 4, pr_weight=0.9))
    B2 = _float(random_ns_behavior(rng, 4, pr_weight=0.8))
    T = tensor(B1, B2)
    for norm in ("l1",):
        for v in ("D_u", "D_max"):
            lhs = float(distance_quantifier(T, norm, v).value)
            rhs = float(distance_quantifier(B1, norm, v).value) + float(distance_quantifier(B2, norm, v).value)
            assert lhs <= rhs + 1e-6
