"""Minimal SVG rendering for graphs, Reeb graphs, barcodes and distance matrices.

Output is plain text with fixed float formatting, so equal inputs give
byte-identical documents.
"""
from __future__ import annotations

from typing import Optional, Sequence

import networkx as nx
import numpy as np

from .core import Barcode, DecoratedReebGraph, FunctionGraph

SIZE = 400
PAD = 20


def _f(x: float) -> str:
    return f"{x:.3f}"


def _doc(body: list[str], w: int = SIZE, h: int = SIZE) -> str:
    head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" '
            f'viewBox="0 0 {w} {h}">')
    return "\n".join([head, *body, "</svg>"]) + "\n"


def _fit(xy: np.ndarray, w: int = SIZE, h: int = SIZE) -> np.ndarray:
    """Scale coordinates into the drawing box, y pointing up."""
    xy = np.asarray(xy, dtype=float).reshape(len(xy), 2)
    lo, hi = xy.min(axis=0), xy.max(axis=0)
    span = np.where(hi - lo > 0, hi - lo, 1.0)
    unit = (xy - lo) / span
    return np.column_stack([PAD + unit[:, 0] * (w - 2 * PAD), h - PAD - unit[:, 1] * (h - 2 * PAD)])


def spring_positions(n: int, edges: np.ndarray, seed: int = 0) -> np.ndarray:
    g = nx.Graph()
    g.add_nodes_from(range(n))
    g.add_edges_from(map(tuple, np.asarray(edges).tolist()))
    pos = nx.spring_layout(g, seed=seed)
    return np.array([pos[i] for i in range(n)]).reshape(n, 2)


def _network(xy: np.ndarray, edges: np.ndarray, colors: Sequence[str], radii: Sequence[float]) -> list[str]:
    body = [f'<line x1="{_f(xy[a, 0])}" y1="{_f(xy[a, 1])}" x2="{_f(xy[b, 0])}" y2="{_f(xy[b, 1])}" '
            f'stroke="#888" stroke-width="1"/>' for a, b in np.asarray(edges).tolist()]
    body += [f'<circle cx="{_f(x)}" cy="{_f(y)}" r="{_f(r)}" fill="{c}"/>'
             for (x, y), c, r in zip(xy.tolist(), colors, radii)]
    return body


def _ramp(v: np.ndarray) -> list[str]:
    """Blue-to-red colors for a scalar array."""
    v = np.asarray(v, dtype=float)
    span = v.max() - v.min() if len(v) else 0.0
    t = (v - v.min()) / span if span > 0 else np.zeros_like(v)
    return [f"#{int(255 * s):02x}40{int(255 * (1 - s)):02x}" for s in t]


def render_graph(graph: FunctionGraph, seed: int = 0) -> str:
    """Nodes at their positions (first two coordinates) or a seeded spring
    layout, colored by the first value coordinate."""
    if graph.positions is not None and graph.positions.shape[1] >= 2:
        xy = graph.positions[:, :2]
    elif graph.positions is not None:
        xy = np.column_stack([graph.positions[:, 0], np.zeros(graph.n)])
    else:
        xy = spring_positions(graph.n, graph.edges, seed)
    colors = _ramp(graph.values[:, 0]) if graph.values is not None else ["#333"] * graph.n
    r = 4.0 if graph.n <= 200 else 2.0
    return _doc(_network(_fit(xy), graph.edges, colors, [r] * graph.n))


def render_drg(drg: DecoratedReebGraph, seed: int = 0) -> str:
    """Classes drawn at height = first value coordinate (spring layout
    horizontally); node size grows with the number of bars."""
    xy = spring_positions(drg.class_count, drg.edges, seed)
    if drg.values is not None:
        xy[:, 1] = drg.values[:, 0]
    bars = [len(d) if isinstance(d, Barcode) else 0 for d in drg.decorations]
    radii = [3.0 + 2.0 * min(b, 5) for b in bars]
    colors = ["#c0392b" if b else "#2c3e50" for b in bars]
    return _doc(_network(_fit(xy), drg.edges, colors, radii))


def render_barcode(b: Barcode, r_max: Optional[float] = None) -> str:
    """Birth-death scatter with the diagonal. Open bars sit on the top edge."""
    pairs = b.clipped() if len(b) else np.zeros((0, 2))
    top = r_max if r_max is not None else (b.r_max if b.r_max is not None else
                                           (float(pairs.max()) if len(pairs) else 1.0))
    top = top if top > 0 else 1.0
    scale = (SIZE - 2 * PAD) / top

    def pt(x, y):
        return PAD + x * scale, SIZE - PAD - y * scale

    x0, y0 = pt(0, 0)
    x1, y1 = pt(top, top)
    body = [f'<line x1="{_f(x0)}" y1="{_f(y0)}" x2="{_f(x1)}" y2="{_f(y1)}" stroke="#999" stroke-width="1"/>']
    for birth, death in pairs.tolist():
        x, y = pt(birth, death)
        body.append(f'<circle cx="{_f(x)}" cy="{_f(y)}" r="3" fill="#1f77b4"/>')
    return _doc(body)


def render_distance_matrix(dist: np.ndarray) -> str:
    """Grayscale heatmap, one rect per cell (dark = close)."""
    d = np.asarray(dist, dtype=float)
    n = len(d)
    top = d.max() if n and d.max() > 0 else 1.0
    cell = (SIZE - 2 * PAD) / max(n, 1)
    body = []
    for i in range(n):
        for j in range(n):
            g = int(255 * d[i, j] / top)
            body.append(f'<rect x="{_f(PAD + j * cell)}" y="{_f(PAD + i * cell)}" width="{_f(cell)}" '
                        f'height="{_f(cell)}" fill="#{g:02x}{g:02x}{g:02x}"/>')
    return _doc(body)


def render_svg(obj, **kw) -> str:
    if isinstance(obj, FunctionGraph):
        return render_graph(obj, **kw)
    if isinstance(obj, DecoratedReebGraph):
        return render_drg(obj, **kw)
    if isinstance(obj, Barcode):
        return render_barcode(obj, **kw)
    return render_distance_matrix(np.asarray(obj), **kw)
