import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from reebdeco.core import Barcode, CapacityError, Interval, InfiniteDistance, SchemaError
from reebdeco.persistence import (SliceSchedule, all_barcodes, bottleneck, bottleneck_matrix,
                                  constrained_vr_filtration, reduce_and_extract, vr_filtration)

from oracles import bars_alive, betti_at, exhaustive_bottleneck, rips_simplices

SQUARE = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])


def _metric(pts):
    pts = np.asarray(pts, dtype=float)
    return np.linalg.norm(pts[:, None] - pts[None], axis=-1)


def test_unit_square_filtration():
    cx = vr_filtration(_metric(SQUARE), r_max=2.0, max_dim=2)
    assert cx.count(0) == 4 and cx.count(1) == 6 and cx.count(2) == 4
    assert cx.scales[1].tolist().count(1.0) == 4
    assert np.allclose(cx.scales[1][4:], math.sqrt(2))
    assert np.allclose(cx.scales[2], math.sqrt(2))


def test_unit_square_h1():
    b = reduce_and_extract(vr_filtration(_metric(SQUARE), r_max=2.0), 1)
    assert len(b) == 1
    iv = b.intervals[0]
    assert iv.birth == 1.0 and abs(iv.death - math.sqrt(2)) < 1e-12


def test_unit_square_h0():
    b = reduce_and_extract(vr_filtration(_metric(SQUARE), r_max=2.0), 0)
    assert sorted((iv.birth, iv.death) for iv in b.intervals if iv.death is not None) == [(0, 1)] * 3
    assert len(b.open_births()) == 1


def test_single_point():
    b = all_barcodes(vr_filtration(np.zeros((1, 1)), r_max=1.0), 1)
    assert [(iv.dim, iv.birth, iv.death) for iv in b.intervals] == [(0, 0.0, None)]


def test_truncation_below_first_edge():
    cx = vr_filtration(_metric(SQUARE), r_max=0.5)
    assert cx.count(0) == 4 and cx.count(1) == 0
    assert len(reduce_and_extract(cx, 0).open_births()) == 4
    assert len(reduce_and_extract(cx, 1)) == 0


@pytest.mark.parametrize("lam,c", [(1.0, 2.0), (1.0, 0.0)])
def test_constrained_square(lam, c):
    rho = np.array([0.0, 0.5, 1.0, 0.5])
    b = reduce_and_extract(constrained_vr_filtration(_metric(SQUARE), rho, SliceSchedule(lam, c), r_max=2.0), 1)
    assert len(b) == 1 and b.intervals[0].birth == 1.0
    assert abs(b.intervals[0].death - math.sqrt(2)) < 1e-12


def test_constrained_lambda_zero_keeps_anchor_slice():
    rho = np.array([0.0, 0.0, 1.0, 1.0])
    cx = constrained_vr_filtration(_metric(SQUARE), rho, SliceSchedule(0.0, 0.0), r_max=2.0)
    assert sorted(cx.simplices[0].ravel().tolist()) == [0, 1]
    assert cx.simplices[1].tolist() == [[0, 1]]


def test_negative_schedule_rejected():
    with pytest.raises(SchemaError):
        SliceSchedule(-1.0, 0.0)


def test_capacity():
    pts = np.random.default_rng(0).random((30, 2))
    with pytest.raises(CapacityError):
        vr_filtration(_metric(pts), r_max=10.0, max_dim=2, capacity=100)


def test_degree_needs_higher_simplices():
    with pytest.raises(SchemaError):
        reduce_and_extract(vr_filtration(_metric(SQUARE), 2.0, max_dim=1), 1)


def test_filtration_order_face_before_coface():
    pts = np.random.default_rng(3).random((7, 2))
    seen = {}
    for pos, (s, val) in enumerate(vr_filtration(_metric(pts), max_dim=2)):
        for j in range(len(s)):
            face = s[:j] + s[j + 1:]
            if face:
                assert face in seen
                assert seen[face][1] <= val
        seen[s] = (pos, val)


def test_bottleneck_examples():
    one = Barcode((Interval(1, 1.0, 3.0),), None)
    assert bottleneck(one, Barcode((), None)) == 1.0
    a = Barcode((Interval(1, 0.0, 2.0),), None)
    b = Barcode((Interval(1, 0.5, 2.0),), None)
    assert bottleneck(a, b) == 0.5


def test_bottleneck_open_mismatch():
    a = Barcode((Interval(0, 0.0, None),), 1.0)
    with pytest.raises(InfiniteDistance):
        bottleneck(a, Barcode((), 1.0))
    assert bottleneck_matrix([a, Barcode((), 1.0)])[0, 1] == math.inf


def test_bottleneck_open_bars_match_by_birth():
    a = Barcode((Interval(0, 0.0, None), Interval(0, 0.25, None)), 1.0)
    b = Barcode((Interval(0, 0.0, None), Interval(0, 0.5, None)), 1.0)
    assert bottleneck(a, b) == 0.25


# ---------------------------------------------------------------------------
# against independent oracles

@pytest.mark.parametrize("seed", range(40))
def test_betti_profile_matches_rank_oracle(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 8))
    met = _metric(rng.random((n, 2)))
    r_max = float(met.max()) + 1.0
    b = all_barcodes(vr_filtration(met, r_max, max_dim=2), 1)
    simp = rips_simplices(met, 2)
    for t in sorted(set(simp.values())):
        for k in (0, 1):
            assert bars_alive(b.intervals, t, k) == betti_at(simp, t, k)


@pytest.mark.parametrize("seed", range(20))
def test_constrained_betti_matches_oracle(seed):
    rng = np.random.default_rng(100 + seed)
    n = int(rng.integers(2, 8))
    met = _metric(rng.random((n, 2)))
    rho = rng.random(n) * 2
    sched = SliceSchedule(float(rng.choice([0.5, 1.0, 2.0])), float(rng.choice([0.0, 0.3])))
    cx = constrained_vr_filtration(met, rho, sched, r_max=10.0)
    b = all_barcodes(cx, 1)
    simp = rips_simplices(met, 2, sched.appearance(rho))
    for t in sorted(set(simp.values())):
        for k in (0, 1):
            assert bars_alive(b.intervals, t, k) == betti_at(simp, t, k)


def test_h0_bar_count_equals_vertices():
    rng = np.random.default_rng(5)
    for _ in range(20):
        n = int(rng.integers(1, 15))
        b = reduce_and_extract(vr_filtration(_metric(rng.random((n, 3))), max_dim=1), 0)
        assert len(b) == n


bars = st.lists(st.tuples(st.integers(0, 16), st.integers(1, 16)).map(lambda t: (t[0] / 4, (t[0] + t[1]) / 4)),
                max_size=5)


def _bc(pairs):
    return Barcode(tuple(Interval(1, b, d) for b, d in pairs), None)


@settings(max_examples=150, deadline=None)
@given(bars, bars)
def test_bottleneck_matches_exhaustive(a, b):
    assert abs(bottleneck(_bc(a), _bc(b)) - exhaustive_bottleneck(a, b)) <= 1e-9


@settings(max_examples=100, deadline=None)
@given(bars, bars, bars)
def test_bottleneck_pseudometric(a, b, c):
    x, y, z = _bc(a), _bc(b), _bc(c)
    assert bottleneck(x, x) == 0
    assert bottleneck(x, y) == bottleneck(y, x)
    assert bottleneck(x, z) <= bottleneck(x, y) + bottleneck(y, z) + 1e-12


@pytest.mark.parametrize("seed", range(10))
def test_stability_under_perturbation(seed):
    rng = np.random.default_rng(seed)
    pts = rng.random((8, 2))
    moved = pts + rng.uniform(-0.02, 0.02, size=pts.shape)
    d1, d2 = _metric(pts), _metric(moved)
    r = max(d1.max(), d2.max()) + 1.0
    b1 = reduce_and_extract(vr_filtration(d1, r), 1)
    b2 = reduce_and_extract(vr_filtration(d2, r), 1)
    assert bottleneck(b1, b2) <= np.abs(d1 - d2).max() + 1e-12
