import numpy as np
import pytest

from reebdeco.core import SchemaError
from reebdeco.graph_build import euclidean_metric
from reebdeco.persistence import reduce_and_extract, vr_filtration
from reebdeco.pipeline import PipelineConfig, run_pipeline
from reebdeco.synthetic import FOUR_CLASSES, SHAPES, TORUS_R, TORUS_r, generate_synthetic


def test_cycle_on_unit_circle_with_h1_bar():
    pts = generate_synthetic("cycle", 100, 0.0, seed=0).points
    assert pts.shape == (100, 2)
    assert np.allclose(np.linalg.norm(pts, axis=1), 1.0)
    b = reduce_and_extract(vr_filtration(euclidean_metric(pts), 2.0), 1)
    assert b.persistence().max() > 1.0


@pytest.mark.parametrize("shape", SHAPES)
def test_seed_repeat_is_bitwise_identical(shape):
    a = generate_synthetic(shape, 50, 0.05, seed=7, per_class=2)
    b = generate_synthetic(shape, 50, 0.05, seed=7, per_class=2)
    a, b = (a, b) if isinstance(a, list) else ([a], [b])
    assert all(x.points.tobytes() == y.points.tobytes() for x, y in zip(a, b))


def test_different_seeds_differ():
    a = generate_synthetic("sphere", 50, 0.0, seed=1).points
    b = generate_synthetic("sphere", 50, 0.0, seed=2).points
    assert not np.array_equal(a, b)


def test_torus_parametrization():
    pts = generate_synthetic("torus", 500, 0.0, seed=0).points
    ring = np.hypot(pts[:, 0], pts[:, 1]) - TORUS_R
    assert np.allclose(np.hypot(ring, pts[:, 2]), TORUS_r)


def test_four_class_set_layout():
    clouds = generate_synthetic("four_class_set", 30, 0.0, seed=0, per_class=2)
    assert [c.name for c in clouds] == [n for n in FOUR_CLASSES for _ in range(2)]


def test_bad_arguments():
    with pytest.raises(SchemaError):
        generate_synthetic("torus", 5)
    with pytest.raises(SchemaError):
        generate_synthetic("cube", 100)


def test_torus_decorations_see_both_loops():
    res = run_pipeline(PipelineConfig(shape="torus", n=2000, noise=0.01), write=False)
    strong = [int((d.persistence() > 0.3).sum()) for d in res.drg.decorations]
    assert max(strong) >= 2
    assert min(strong) >= 1
