import numpy as np
import pytest

from reebdeco.core import FunctionGraph, SchemaError
from reebdeco.reeb_quotient import QuotientSpec, quotient_classes, round_values, smooth_quotient
from reebdeco.reeb_radius import reeb_radius_matrix

from oracles import level_set_partition, partition_of, random_function_graph


def test_round_values():
    g = FunctionGraph(2, [(0, 1)], [0.12, 0.38])
    assert round_values(g, 0.25).values[:, 0].tolist() == [0.0, 0.5]
    assert len(set(round_values(g, 10.0).values[:, 0].tolist())) == 1
    h = FunctionGraph(2, [(0, 1)], [0.25, -0.5])
    assert round_values(h, 0.25) == h
    with pytest.raises(SchemaError):
        round_values(g, 0.0)


def test_round_perturbation_bound():
    rng = np.random.default_rng(0)
    g = random_function_graph(rng, 8, dim=3)
    r = round_values(g, 0.3)
    assert np.all(np.linalg.norm(r.values - g.values, axis=1) <= np.sqrt(3) / 2 * 0.3 + 1e-12)


def test_four_cycle():
    g = FunctionGraph(4, [(0, 1), (1, 2), (2, 3), (0, 3)], [0.0, 1.0, 1.0, 0.0])
    q = smooth_quotient(g, 0.0)
    assert partition_of(q.class_of) == {frozenset({0, 3}), frozenset({1, 2})}
    assert q.edges.tolist() == [[0, 1]]
    assert q.metric[0, 1] == 2.0
    assert q.representative.tolist() == [0, 1]


def test_path_merge_at_eps_one():
    g = FunctionGraph(5, [(i, i + 1) for i in range(4)], [0.0, 2.0, 1.0, 2.0, 0.0])
    q = smooth_quotient(g, 1.0)
    assert q.class_count == 4
    assert q.class_of[1] == q.class_of[3]
    assert q.class_of[0] != q.class_of[4]
    assert smooth_quotient(g, 0.0).class_count == 5


def test_constant_single_class():
    g = FunctionGraph(4, [(0, 1), (1, 2), (2, 3)], np.full(4, 1.0))
    q = smooth_quotient(g, 0.0)
    assert q.class_count == 1 and len(q.edges) == 0


def test_round_step_in_spec():
    g = FunctionGraph(3, [(0, 1), (1, 2)], [0.1, 0.05, -0.1])
    q = smooth_quotient(g, QuotientSpec(0.0, 0.5))
    assert q.class_count == 1
    assert q.params == {"epsilon": 0.0, "round_step": 0.5}


def test_level_sets_match_flood_fill():
    rng = np.random.default_rng(5)
    for _ in range(100):
        g = random_function_graph(rng, int(rng.integers(1, 12)), rounded=0.5)
        labels = quotient_classes(g, 0.0)
        assert partition_of(labels) == level_set_partition(g.n, g.edges.tolist(), g.values)


def test_refinement_and_class_properties():
    rng = np.random.default_rng(6)
    for _ in range(60):
        g = random_function_graph(rng, int(rng.integers(2, 11)), rounded=0.5)
        rho = reeb_radius_matrix(g)
        e1, e2 = sorted(rng.uniform(0, 2, 2))
        fine, coarse = smooth_quotient(g, e1), smooth_quotient(g, e2)
        for c in range(fine.class_count):
            assert len(set(coarse.class_of[fine.class_of == c].tolist())) == 1
        # members of a class share the value and are within eps of each other
        for v in range(g.n):
            for w in range(g.n):
                if fine.class_of[v] == fine.class_of[w]:
                    assert g.values[v, 0] == g.values[w, 0] and rho[v, w] <= e1


def test_quotient_metric_properties():
    rng = np.random.default_rng(7)
    for _ in range(60):
        g = random_function_graph(rng, int(rng.integers(2, 11)), rounded=0.5)
        eps = float(rng.uniform(0, 1))
        q = smooth_quotient(g, eps)
        d = q.metric
        assert np.array_equal(d, d.T) and not np.diag(d).any()
        assert np.all(d[:, None, :] <= d[:, :, None] + d[None, :, :] + 2 * eps + 1e-12)
        # every original edge between classes is present
        ce = {tuple(sorted(p)) for p in q.class_of[g.edges].tolist() if p[0] != p[1]}
        assert ce == {tuple(e) for e in q.edges.tolist()}
