"""Decorations on Reeb quotient classes: Reeb-radius filtrations, their Rips
barcodes, and persistence-image vectorizations."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.special import ndtr

from .core import (Barcode, CapacityError, DecoratedReebGraph, FunctionGraph, PersistenceImage,
                   SchemaError)
from .persistence import (DEFAULT_CAPACITY, SliceSchedule, filtration_from_skeleton, reduce_and_extract,
                          rips_skeleton)
from .reeb_radius import reeb_radius_from, reeb_radius_rows


@dataclass(frozen=True, eq=False)
class FiltrationDecoration:
    anchor: int
    rho_values: np.ndarray


def filtration_decoration(graph: FunctionGraph, drg: DecoratedReebGraph, cls: int) -> FiltrationDecoration:
    if not 0 <= cls < drg.class_count:
        raise SchemaError(f"class {cls} out of range")
    rep = int(drg.representative[cls])
    return FiltrationDecoration(cls, reeb_radius_from(graph, rep).rho)


def farthest_point_sample(metric: np.ndarray, m: int, start: int = 0) -> np.ndarray:
    """Greedy farthest-point landmarks (ties to the smaller index), sorted."""
    n = metric.shape[0]
    if m >= n:
        return np.arange(n)
    chosen = [start]
    gap = metric[start].copy()
    for _ in range(m - 1):
        nxt = int(np.argmax(gap))
        chosen.append(nxt)
        np.minimum(gap, metric[nxt], out=gap)
    return np.sort(np.array(chosen))


class _DecorationContext:
    """Landmarks, shared Rips skeleton and truncation scale for one graph.

    ``r_max`` defaults to the larger of the landmark diameter and the latest
    vertex appearance over all anchors, so every filtration ends in the full
    simplex and barcodes of different anchors stay comparable.
    """

    def __init__(self, graph: FunctionGraph, rows: np.ndarray, schedule: SliceSchedule, k: int,
                 r_max: float | None, landmarks: int | None, capacity: int):
        metric = graph.require_metric()
        self.points = (np.arange(graph.n) if landmarks is None
                       else farthest_point_sample(metric, int(landmarks)))
        self.metric = metric[np.ix_(self.points, self.points)]
        self.appearances = schedule.appearance(rows[:, self.points])
        if r_max is None:
            finite = self.appearances[np.isfinite(self.appearances)]
            r_max = max(float(self.metric.max()), float(finite.max()) if finite.size else 0.0)
        self.r_max = float(r_max)
        self.k = k
        self.capacity = capacity
        self._skeleton = None

    @property
    def skeleton(self):
        if self._skeleton is None:
            self._skeleton = rips_skeleton(self.metric, self.r_max, self.k + 1, self.capacity)
        return self._skeleton

    def barcode(self, row: int) -> Barcode:
        cx = filtration_from_skeleton(self.skeleton, self.appearances[row])
        return reduce_and_extract(cx, self.k)


def barcode_decoration(graph: FunctionGraph, drg: DecoratedReebGraph, cls: int, schedule: SliceSchedule,
                       k: int = 1, r_max: float | None = None, *, landmarks: int | None = None,
                       capacity: int = DEFAULT_CAPACITY) -> Barcode:
    """Degree-k barcode of the Rips filtration of points y with
    rho(rep, y) <= lam * r + c, anchored at the class representative."""
    if not 0 <= cls < drg.class_count:
        raise SchemaError(f"class {cls} out of range")
    rows = reeb_radius_rows(graph, [int(drg.representative[cls])])
    return _DecorationContext(graph, rows, schedule, k, r_max, landmarks, capacity).barcode(0)


def decorate_all(graph: FunctionGraph, drg: DecoratedReebGraph, schedule: SliceSchedule, k: int = 1,
                 r_max: float | None = None, *, landmarks: int | None = None,
                 capacity: int = DEFAULT_CAPACITY, rows: np.ndarray | None = None) -> DecoratedReebGraph:
    """Barcode decoration for every class, in class order.

    ``rows`` may pass precomputed Reeb radius rows of the representatives.
    A class whose complex overflows ``capacity`` is left undecorated.
    """
    if rows is None:
        rows = reeb_radius_rows(graph, drg.representative)
    ctx = _DecorationContext(graph, rows, schedule, k, r_max, landmarks, capacity)
    decs: list[Optional[Barcode]] = []
    failed = []
    for c in range(drg.class_count):
        try:
            decs.append(ctx.barcode(c))
        except CapacityError:
            decs.append(None)
            failed.append(c)
    return drg.with_decorations(decs, lam=schedule.lam, c=schedule.c, k=k, r_max=ctx.r_max,
                                landmarks=None if landmarks is None else int(len(ctx.points)),
                                capacity_failures=failed)


# ---------------------------------------------------------------------------
# persistence images

@dataclass(frozen=True)
class ImageSpec:
    """Grid and weighting for persistence images. Unset fields are derived
    from the barcodes being vectorized (see :func:`image_spec_for`)."""

    resolution: tuple = (25, 25)
    sigma: Optional[float] = None
    birth_range: Optional[tuple] = None
    pers_range: Optional[tuple] = None
    pers_cap: Optional[float] = None


def image_spec_for(barcodes: Sequence[Optional[Barcode]], resolution=(25, 25), sigma: float | None = None,
                   margin: float = 0.0) -> ImageSpec:
    """Common ranges covering every bar of ``barcodes``.

    ``margin`` pads both ranges by that many sigmas.
    """
    pairs = [b.clipped() for b in barcodes if b is not None and len(b)]
    pairs = np.concatenate(pairs) if pairs else np.zeros((0, 2))
    pers = pairs[:, 1] - pairs[:, 0]
    pmax = float(pers.max()) if len(pers) and pers.max() > 0 else 1.0
    bmin = float(pairs[:, 0].min()) if len(pairs) else 0.0
    bmax = float(pairs[:, 0].max()) if len(pairs) else 0.0
    if bmax - bmin < pmax:
        mid = (bmax + bmin) / 2
        bmin, bmax = mid - pmax / 2, mid + pmax / 2
    sig = pmax / 20 if sigma is None else float(sigma)
    pad = margin * sig
    return ImageSpec(tuple(resolution), sig, (bmin - pad, bmax + pad), (0.0 - pad, pmax + pad), pmax)


def persistence_image(b: Barcode, resolution=(25, 25), sigma: float | None = None,
                      birth_range: tuple | None = None, pers_range: tuple | None = None,
                      pers_cap: float | None = None) -> PersistenceImage:
    """Gaussian mass of each (birth, persistence) point integrated per pixel,
    weighted by min(persistence / pers_cap, 1). Open bars end at r_max."""
    if birth_range is None or pers_range is None or sigma is None or pers_cap is None:
        auto = image_spec_for([b], resolution, sigma)
        birth_range = auto.birth_range if birth_range is None else birth_range
        pers_range = auto.pers_range if pers_range is None else pers_range
        sigma = (pers_range[1] - pers_range[0]) / 20 if sigma is None else sigma
        pers_cap = auto.pers_cap if pers_cap is None else pers_cap
    if not sigma > 0:
        raise SchemaError("sigma must be positive")
    rows, cols = int(resolution[0]), int(resolution[1])
    bx = np.linspace(birth_range[0], birth_range[1], cols + 1)
    py = np.linspace(pers_range[0], pers_range[1], rows + 1)
    pixels = np.zeros((rows, cols))
    pairs = b.clipped() if len(b) else np.zeros((0, 2))
    for birth, death in pairs:
        pers = death - birth
        weight = min(pers / pers_cap, 1.0) if pers_cap > 0 else 1.0
        if weight <= 0:
            continue
        mass_b = np.diff(ndtr((bx - birth) / sigma))
        mass_p = np.diff(ndtr((py - pers) / sigma))
        pixels += weight * np.outer(mass_p, mass_b)
    return PersistenceImage((rows, cols), tuple(birth_range), tuple(pers_range), float(sigma), pixels)


def image_from_spec(b: Barcode, spec: ImageSpec) -> PersistenceImage:
    return persistence_image(b, spec.resolution, spec.sigma, spec.birth_range, spec.pers_range, spec.pers_cap)


def vectorize_drg(drg: DecoratedReebGraph, spec: ImageSpec | None = None) -> DecoratedReebGraph:
    """Replace barcode decorations by persistence images on a common grid.
    Undecorated classes get an all-zero image; existing images are kept."""
    barcodes = [d for d in drg.decorations if isinstance(d, Barcode)]
    if spec is None or None in (spec.sigma, spec.birth_range, spec.pers_range, spec.pers_cap):
        spec = image_spec_for(barcodes, spec.resolution if spec else (25, 25))
    empty = Barcode((), None)
    images = [d if isinstance(d, PersistenceImage) else image_from_spec(d if d is not None else empty, spec)
              for d in drg.decorations]
    return drg.with_decorations(images, image_resolution=list(spec.resolution), image_sigma=spec.sigma)
