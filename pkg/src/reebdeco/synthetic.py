"""Seeded synthetic point clouds.

Every generator draws from ``np.random.default_rng`` seeded by a
``SeedSequence``; multi-sample sets spawn one child sequence per sample, so a
single integer seed fixes everything.

Parametrizations (z is the height axis):

* ``cycle``: unit circle in the xy-plane.
* ``sphere``: unit sphere, uniform on the surface.
* ``torus``: axis z, radii R=2, r=0.7, uniform on the surface.
* ``torus_wedge_circle``: the torus above plus a vertical circle of radius 3
  in the xz-plane centred at (5.7, 0, 0), touching the torus at (2.7, 0, 0).
  One third of the points go on the circle.
* ``four_class_set``: sphere, vertical circle, torus (R=2, r=1), open
  cylinder; every sample is randomly scaled, rotated about z and noised.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import SchemaError

SHAPES = ("torus_wedge_circle", "sphere", "torus", "cycle", "four_class_set")
FOUR_CLASSES = ("sphere", "circle", "torus", "cylinder")
TORUS_R, TORUS_r = 2.0, 0.7
WEDGE_RADIUS = 3.0
WEDGE_POINT = np.array([TORUS_R + TORUS_r, 0.0, 0.0])
CIRCLE_CENTER = WEDGE_POINT + np.array([WEDGE_RADIUS, 0.0, 0.0])
CIRCLE_FAR_POINT = CIRCLE_CENTER + np.array([WEDGE_RADIUS, 0.0, 0.0])
FOUR_CLASS_TILT = 0.0


@dataclass(frozen=True, eq=False)
class PointCloud:
    points: np.ndarray
    labels: np.ndarray  # per-point component (torus_wedge_circle) or zeros
    name: str


def _rng(seed) -> np.random.Generator:
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    return np.random.default_rng(ss)


def sample_circle(rng, n, radius=1.0, plane="xy") -> np.ndarray:
    t = rng.uniform(0, 2 * np.pi, n)
    a, b = radius * np.cos(t), radius * np.sin(t)
    zero = np.zeros(n)
    return np.column_stack([a, b, zero] if plane == "xy" else [a, zero, b])


def sample_sphere(rng, n, radius=1.0) -> np.ndarray:
    x = rng.standard_normal((n, 3))
    return radius * x / np.linalg.norm(x, axis=1, keepdims=True)


def sample_torus(rng, n, R=TORUS_R, r=TORUS_r) -> np.ndarray:
    """Uniform on the surface by rejection on the tube angle."""
    out = []
    while sum(len(o) for o in out) < n:
        u = rng.uniform(0, 2 * np.pi, 2 * n)
        v = rng.uniform(0, 2 * np.pi, 2 * n)
        keep = rng.uniform(0, R + r, 2 * n) < R + r * np.cos(v)
        u, v = u[keep], v[keep]
        w = R + r * np.cos(v)
        out.append(np.column_stack([w * np.cos(u), w * np.sin(u), r * np.sin(v)]))
    return np.concatenate(out)[:n]


def sample_cylinder(rng, n, radius=1.0, height=2.0) -> np.ndarray:
    t = rng.uniform(0, 2 * np.pi, n)
    z = rng.uniform(-height / 2, height / 2, n)
    return np.column_stack([radius * np.cos(t), radius * np.sin(t), z])


def _noise(rng, pts, noise):
    return pts + noise * rng.standard_normal(pts.shape) if noise > 0 else pts


def torus_wedge_circle(n: int, noise: float, seed) -> PointCloud:
    rng = _rng(seed)
    n_circle = n // 3
    torus = sample_torus(rng, n - n_circle)
    circle = sample_circle(rng, n_circle, WEDGE_RADIUS, plane="xz") + CIRCLE_CENTER
    pts = _noise(rng, np.vstack([torus, circle]), noise)
    labels = np.repeat([0, 1], [n - n_circle, n_circle])
    return PointCloud(pts, labels, "torus_wedge_circle")


def four_class_sample(cls: str, n: int, noise: float, seed, tilt: float = FOUR_CLASS_TILT) -> np.ndarray:
    """One shape with random scale in [0.9, 1.1], spin about z and a tilt of
    up to ``tilt`` radians about x, plus Gaussian noise."""
    rng = _rng(seed)
    if cls == "sphere":
        pts = sample_sphere(rng, n)
    elif cls == "circle":
        pts = sample_circle(rng, n, 1.0, plane="xz")
    elif cls == "torus":
        pts = sample_torus(rng, n, 2.0, 1.0)
    elif cls == "cylinder":
        pts = sample_cylinder(rng, n)
    else:
        raise SchemaError(f"unknown class {cls!r}")
    scale = rng.uniform(0.9, 1.1)
    a = rng.uniform(0, 2 * np.pi)
    rot = np.array([[np.cos(a), -np.sin(a), 0], [np.sin(a), np.cos(a), 0], [0, 0, 1]])
    b = rng.uniform(-tilt, tilt)
    rot = np.array([[1, 0, 0], [0, np.cos(b), -np.sin(b)], [0, np.sin(b), np.cos(b)]]) @ rot
    return _noise(rng, scale * pts @ rot.T, noise)


def four_class_set(n: int, noise: float, seed, per_class: int = 10,
                   tilt: float = FOUR_CLASS_TILT) -> list[PointCloud]:
    children = np.random.SeedSequence(seed).spawn(len(FOUR_CLASSES) * per_class)
    out = []
    for ci, cls in enumerate(FOUR_CLASSES):
        for s in range(per_class):
            pts = four_class_sample(cls, n, noise, children[ci * per_class + s], tilt)
            out.append(PointCloud(pts, np.full(n, ci), cls))
    return out


def generate_synthetic(shape: str, n: int, noise: float = 0.0, seed=0, per_class: int = 10):
    """One PointCloud, or a list of them for ``four_class_set``."""
    if n < 10:
        raise SchemaError("n must be at least 10")
    if noise < 0:
        raise SchemaError("noise must be nonnegative")
    if shape == "four_class_set":
        return four_class_set(n, noise, seed, per_class)
    if shape == "torus_wedge_circle":
        return torus_wedge_circle(n, noise, seed)
    rng = _rng(seed)
    if shape == "cycle":
        pts = sample_circle(rng, n)[:, :2]
    elif shape == "sphere":
        pts = sample_sphere(rng, n)
    elif shape == "torus":
        pts = sample_torus(rng, n)
    else:
        raise SchemaError(f"unknown shape {shape!r}; choose from {', '.join(SHAPES)}")
    return PointCloud(_noise(rng, pts, noise), np.zeros(n, dtype=np.int64), shape)
