from fractions import Fraction as F

import pytest

from ctxgeom.behaviors import bell_scenario, ncycle_scenario, pr_box
from ctxgeom.errors import DomainError, ValidationError
from ctxgeom.scenario import (Behavior, CompatibilityScenario, NormalizationError,
                              behavior_from_global_section, check_nondisturbance,
                              compatibility_graph, deterministic_behavior,
                              enumerate_classical_vertices, juxtapose, marginal, restrict, tensor,
                              uniform_behavior)

from conftest import random_weights_on_simplex


def test_scenario_validation():
    with pytest.raises(ValidationError):
        CompatibilityScenario(("a", "a"), ((0, 1),), (0, 1))
    with pytest.raises(ValidationError):
        CompatibilityScenario(("a", "b"), ((0, 2),), (0, 1))
    with pytest.raises(ValidationError):
        CompatibilityScenario(("a", "b"), ((0, 1),), (0,))
    sc = CompatibilityScenario.from_names(["a", "b", "c"], [["b", "a"], ["c", "b"]], [0, 1])
    assert sc.contexts == ((0, 1), (1, 2))


def test_outcome_order_and_offsets():
    sc = CompatibilityScenario(("x", "y", "z", "w"), ((0, 1, 2), (3,)), ("u", "v"))
    assert sc.outcome_strings(0)[:3] == [("u", "u", "u"), ("u", "u", "v"), ("u", "v", "u")]
    assert sc.offsets == (0, 8, 10)
    with pytest.raises(ValidationError):
        CompatibilityScenario(("x", "y", "z"), ((0, 1, 2), (2,)), ("u", "v"))
    assert sc.local_index(0, ("v", "u", "u")) == 4


def test_incidence_matrix_matches_deterministic_behaviors():
    sc = ncycle_scenario(4)
    M = sc.incidence_matrix()
    verts = enumerate_classical_vertices(sc)
    assert M.shape == (16, 16)
    for j, B in enumerate(verts):
        assert tuple(int(a) for a in M[:, j]) == B.flatten()
    assert (M.sum(axis=0) == sc.num_contexts).all()


def test_normalization_errors():
    sc = ncycle_scenario(4)
    rows = [(F(1, 4),) * 4] * 4
    Behavior(sc, tuple(rows))
    bad = [(F(1, 4), F(1, 4), F(1, 4), F(1, 8))] + rows[1:]
    with pytest.raises(NormalizationError):
        Behavior(sc, tuple(bad))
    neg = [(F(1, 2), F(1, 2), F(1, 2), F(-1, 2))] + rows[1:]
    with pytest.raises(NormalizationError):
        Behavior(sc, tuple(neg))


def test_marginals_and_nondisturbance():
    B = pr_box(4)
    m = marginal(B, 0, ["M1"])
    assert m[(1,)] == F(1, 2)
    assert check_nondisturbance(B) == []
    rows = list(B.table)
    rows[0] = (F(1, 2), F(1, 4), 0, F(1, 4))
    D = Behavior(B.scenario, tuple(rows))
    viol = check_nondisturbance(D)
    assert viol and all(v.discrepancy > 0 for v in viol)


def test_float_nondisturbance_tolerance():
    B = pr_box(4).to_float()
    assert check_nondisturbance(B) == []


def test_restrict():
    assert restrict((1, -1, 1), (0, 2, 5), (5, 0)) == (1, 1)
    with pytest.raises(DomainError):
        restrict((1, -1), (0, 1), (2,))


def test_global_sections_are_nondisturbing(rng):
    sc = bell_scenario(2, 3)
    for _ in range(10):
        w = random_weights_on_simplex(sc.num_global_assignments(), rng, denom=30, support=5)
        B = behavior_from_global_section(sc, w)
        assert B.exact
        assert check_nondisturbance(B) == []


def test_compatibility_graph_of_triangle_context():
    sc = CompatibilityScenario(("a", "b", "c", "d"), ((0, 1, 2), (2, 3)), (0, 1))
    G = compatibility_graph(sc)
    assert G.edges == ((0, 1), (0, 2), (1, 2), (2, 3))


def test_juxtapose_and_tensor():
    A = uniform_behavior(ncycle_scenario(3))
    B = pr_box(4)
    J = juxtapose(A, B)
    assert J.scenario.num_contexts == 7
    assert J.flatten() == A.flatten() + B.flatten()
    T = tensor(A, B)
    assert T.scenario.num_contexts == 12
    assert all(abs(sum(r) - 1) == 0 for r in T.table)
    assert check_nondisturbance(T) == []


def test_deterministic_behavior():
    sc = ncycle_scenario(3)
    D = deterministic_behavior(sc, (1, -1, -1))
    assert D.p(0, (1, -1)) == 1 and D.p(1, (-1, -1)) == 1
