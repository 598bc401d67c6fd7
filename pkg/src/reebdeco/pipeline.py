"""End-to-end run: cloud -> graph -> field -> Reeb radius -> smoothed quotient
-> barcode decorations (-> persistence images) -> files."""
from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .core import Barcode, FunctionGraph, ReebDecoError, SchemaError, load_point_cloud_csv, save_drg
from .decorate import ImageSpec, decorate_all, vectorize_drg
from .graph_build import eccentricity_field, euclidean_metric, height_field, knn_graph, pagerank_field, radius_graph
from .persistence import DEFAULT_CAPACITY, SliceSchedule
from .reeb_quotient import QuotientSpec, round_values, smooth_quotient
from .render import render_drg
from .synthetic import generate_synthetic


@dataclass
class PipelineConfig:
    input: Optional[str] = None          # CSV path; if unset a synthetic shape is generated
    shape: str = "torus_wedge_circle"
    n: int = 3000
    noise: float = 0.02
    knn: Optional[int] = 10
    radius: Optional[float] = None
    field: str = "height:2"              # height:<axis> | ecc:<p> | pagerank:<damping>
    round_step: Optional[float] = 0.25
    epsilon: float = 0.25
    lam: float = 1.0
    c: float = 0.0
    k: int = 1
    r_max: Optional[float] = 4.5
    landmarks: Optional[int] = 150
    capacity: int = DEFAULT_CAPACITY
    image: Optional[tuple] = None        # e.g. (25, 25) to vectorize
    sigma: Optional[float] = None
    out_dir: str = "out"
    seed: int = 0
    svg: bool = True

    def validate(self) -> None:
        if (self.knn is None) == (self.radius is None):
            raise SchemaError("give exactly one of knn and radius")
        if self.knn is not None and self.knn < 1:
            raise SchemaError("knn must be positive")
        if self.radius is not None and not self.radius > 0:
            raise SchemaError("radius must be positive")
        if self.epsilon < 0 or self.c < 0 or self.lam < 0 or self.k < 0:
            raise SchemaError("epsilon, lam, c and k must be nonnegative")
        if self.round_step is not None and not self.round_step > 0:
            raise SchemaError("round_step must be positive")
        if self.r_max is not None and not self.r_max > 0:
            raise SchemaError("r_max must be positive")
        parse_field(self.field)


def parse_field(spec: str) -> tuple[str, float]:
    kind, _, arg = spec.partition(":")
    defaults = {"height": 2.0, "ecc": 2.0, "pagerank": 0.85}
    if kind not in defaults:
        raise SchemaError(f"unknown field {spec!r}")
    try:
        return kind, float(arg) if arg else defaults[kind]
    except ValueError:
        raise SchemaError(f"bad field argument in {spec!r}") from None


def compute_field(graph: FunctionGraph, points: np.ndarray, spec: str) -> np.ndarray:
    kind, arg = parse_field(spec)
    if kind == "height":
        return height_field(points, int(arg))
    if kind == "ecc":
        return eccentricity_field(graph, arg)
    return pagerank_field(graph, arg)


def build_graph(points: np.ndarray, knn: Optional[int], radius: Optional[float]) -> FunctionGraph:
    if len(points) == 1:
        return FunctionGraph(1, np.zeros((0, 2), np.int64), None, np.zeros((1, 1)), points, metric_trusted=True)
    return knn_graph(points, knn) if knn is not None else radius_graph(points, radius)


@dataclass
class PipelineResult:
    drg: object
    graph: FunctionGraph
    report: dict
    timings: dict = field(default_factory=dict)


class _Stages:
    def __init__(self):
        self.timings = {}

    def run(self, name, fn, *args, **kw):
        t0 = time.perf_counter()
        try:
            out = fn(*args, **kw)
        except ReebDecoError as e:
            e.args = (f"[{name}] {e.args[0] if e.args else ''}",) + e.args[1:]
            e.stage = name
            raise
        self.timings[name] = time.perf_counter() - t0
        return out


def run_pipeline(cfg: PipelineConfig, points: np.ndarray | None = None, write: bool = True) -> PipelineResult:
    """Run every stage; errors carry the stage name. With ``write`` the DRG,
    report, timings and (optionally) an SVG are written to ``cfg.out_dir``.

    Timings live in their own file so the other outputs are reproducible
    byte for byte.
    """
    cfg.validate()
    st = _Stages()
    if points is None:
        if cfg.input is not None:
            points = st.run("load", load_point_cloud_csv, cfg.input)
        else:
            points = st.run("generate", generate_synthetic, cfg.shape, cfg.n, cfg.noise, cfg.seed).points
    graph = st.run("graph", build_graph, np.atleast_2d(points), cfg.knn, cfg.radius)
    values = st.run("field", compute_field, graph, graph.positions, cfg.field)
    graph = graph.with_values(np.asarray(values, dtype=float).reshape(graph.n, -1))
    if cfg.round_step is not None:
        graph = st.run("round", round_values, graph, cfg.round_step)
    drg, rows = st.run("quotient", smooth_quotient, graph, QuotientSpec(cfg.epsilon), return_rows=True)
    drg = st.run("decorate", decorate_all, graph, drg, SliceSchedule(cfg.lam, cfg.c), cfg.k, cfg.r_max,
                 landmarks=cfg.landmarks, capacity=cfg.capacity, rows=rows)
    drg = drg.with_decorations(drg.decorations, round_step=cfg.round_step)
    bars = [len(d) if isinstance(d, Barcode) else None for d in drg.decorations]
    if cfg.image is not None:
        drg = st.run("vectorize", vectorize_drg, drg, ImageSpec(tuple(cfg.image), cfg.sigma))
    report = {
        "nodes": graph.n,
        "edges": int(len(graph.edges)),
        "classes": drg.class_count,
        "bar_counts": bars,
        # where outputs go does not affect them, so it is left out
        "config": {k: (list(v) if isinstance(v, tuple) else v) for k, v in asdict(cfg).items() if k != "out_dir"},
    }
    if write:
        out = Path(cfg.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "drg.json").write_text(save_drg(drg))
        (out / "report.json").write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
        if cfg.svg:
            (out / "drg.svg").write_text(st.run("render", render_drg, drg, seed=cfg.seed))
        (out / "timings.json").write_text(json.dumps(st.timings, indent=2, sort_keys=True) + "\n")
    return PipelineResult(drg, graph, report, st.timings)
