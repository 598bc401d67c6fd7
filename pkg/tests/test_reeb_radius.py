import time

import numpy as np
import pytest

from reebdeco.core import FunctionGraph, SizeError
from reebdeco.reeb_radius import (oracle_reeb_distance, oracle_reeb_radius, reeb_radius_from,
                                  reeb_radius_matrix)

from oracles import random_function_graph

PATH = FunctionGraph(3, [(0, 1), (1, 2)], [0.0, 4.0, 3.0])
# a, c, b, d with edges a-c, c-b, a-d, d-b
DIAMOND = FunctionGraph(4, [(0, 1), (1, 2), (0, 3), (3, 2)], [0.0, 5.0, 0.0, 1.0])


def test_path_examples():
    assert reeb_radius_from(PATH, 0).rho.tolist() == [0, 4, 4]
    assert reeb_radius_from(PATH, 2).rho.tolist() == [3, 1, 0]
    assert reeb_radius_matrix(PATH).tolist() == [[0, 4, 4], [4, 0, 1], [3, 1, 0]]


def test_diamond_takes_low_path():
    assert reeb_radius_from(DIAMOND, 0).rho[2] == 1.0
    assert oracle_reeb_radius(DIAMOND, 0, 2) == 1.0
    assert oracle_reeb_distance(DIAMOND, 0, 2) == 1.0


def test_oracle_examples():
    assert oracle_reeb_radius(PATH, 0, 2) == 4
    assert oracle_reeb_radius(PATH, 1, 1) == 0
    assert oracle_reeb_distance(PATH, 0, 2) == 4


def test_constant_and_single():
    g = FunctionGraph(4, [(0, 1), (1, 2), (2, 3)], np.full(4, 2.5))
    assert not reeb_radius_matrix(g).any()
    assert oracle_reeb_distance(g, 0, 3) == 0
    assert reeb_radius_matrix(FunctionGraph(1, [], [1.0])).tolist() == [[0.0]]


def test_oracle_size_cap():
    g = FunctionGraph(13, [(i, i + 1) for i in range(12)], np.arange(13.0))
    with pytest.raises(SizeError):
        oracle_reeb_radius(g, 0, 12)


def test_vector_values():
    g = FunctionGraph(3, [(0, 1), (1, 2)], [[0.0, 0.0], [3.0, 4.0], [0.0, 1.0]])
    assert reeb_radius_from(g, 0).rho.tolist() == [0, 5, 5]


def test_matches_oracle_random():
    rng = np.random.default_rng(11)
    for _ in range(150):
        g = random_function_graph(rng, int(rng.integers(1, 9)), dim=int(rng.integers(1, 3)))
        m = reeb_radius_matrix(g)
        for x in range(g.n):
            for y in range(g.n):
                assert m[x, y] == oracle_reeb_radius(g, x, y)


def triangle_excess(m):
    """max over (x, y, z) of rho(x, z) - rho(x, y) - rho(y, z)."""
    return float((m[:, None, :] - m[:, :, None] - m[None, :, :]).max())


def test_quasimetric_exact_on_dyadic_values():
    rng = np.random.default_rng(12)
    for _ in range(100):
        g = random_function_graph(rng, int(rng.integers(2, 10)), exact=True)
        m = reeb_radius_matrix(g)
        assert np.all(np.diag(m) == 0)
        assert triangle_excess(m) <= 0
        vd = np.abs(g.values[:, 0][:, None] - g.values[:, 0][None, :])
        assert np.all(m >= vd)


def test_quasimetric_generic_values_up_to_rounding():
    rng = np.random.default_rng(12)
    for _ in range(100):
        g = random_function_graph(rng, int(rng.integers(2, 10)), dim=2)
        m = reeb_radius_matrix(g)
        assert triangle_excess(m) <= 4 * np.finfo(float).eps * max(1.0, m.max())


def test_sandwich():
    rng = np.random.default_rng(13)
    for _ in range(40):
        g = random_function_graph(rng, int(rng.integers(2, 8)))
        for x in range(g.n):
            for y in range(g.n):
                r = oracle_reeb_radius(g, x, y)
                d = oracle_reeb_distance(g, x, y)
                assert r <= d <= 2 * r


def test_deterministic():
    rng = np.random.default_rng(14)
    g = random_function_graph(rng, 9)
    a = reeb_radius_matrix(g)
    assert a.tobytes() == reeb_radius_matrix(g).tobytes()
