"""Build FunctionGraphs from point clouds and compute scalar fields on them."""
from __future__ import annotations

import numpy as np
from scipy.spatial.distance import cdist

from .core import DisconnectedError, FunctionGraph, NonConvergence, SchemaError, count_components


def _cloud(points) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    if pts.ndim != 2 or pts.shape[0] == 0:
        raise SchemaError("point cloud must be a nonempty (n, d) array")
    if not np.all(np.isfinite(pts)):
        raise SchemaError("point cloud has non-finite coordinates")
    return pts


def euclidean_metric(points) -> np.ndarray:
    pts = _cloud(points)
    return cdist(pts, pts)


def _finish(pts: np.ndarray, dist: np.ndarray, edges: np.ndarray) -> FunctionGraph:
    n = len(pts)
    n_comp = count_components(n, edges)
    if n_comp != 1:
        raise DisconnectedError(n_comp)
    return FunctionGraph(n, edges, None, dist, pts, metric_trusted=True)


def knn_graph(points, k: int) -> FunctionGraph:
    """Union of the directed k-nearest-neighbor relations.

    Distance ties go to the smaller index. The Euclidean metric is attached as
    the node metric and the coordinates as positions.
    """
    pts = _cloud(points)
    n = len(pts)
    if not 0 < k < n:
        raise SchemaError(f"k must satisfy 0 < k < n (k={k}, n={n})")
    dist = cdist(pts, pts)
    masked = dist.copy()
    np.fill_diagonal(masked, np.inf)
    order = np.argsort(masked, axis=1, kind="stable")[:, :k]
    rows = np.repeat(np.arange(n), k)
    edges = np.stack([rows, order.ravel()], axis=1)
    edges = np.unique(np.sort(edges, axis=1), axis=0)
    return _finish(pts, dist, edges)


def radius_graph(points, r: float) -> FunctionGraph:
    """Edge [i, j] whenever the two points are within distance ``r``."""
    if not r > 0:
        raise SchemaError("radius must be positive")
    pts = _cloud(points)
    dist = cdist(pts, pts)
    i, j = np.nonzero(np.triu(dist <= r, k=1))
    return _finish(pts, dist, np.stack([i, j], axis=1))


def height_field(points, axis: int) -> np.ndarray:
    pts = _cloud(points)
    if not 0 <= axis < pts.shape[1]:
        raise SchemaError(f"axis {axis} out of range for {pts.shape[1]}-d points")
    return pts[:, axis].copy()


def eccentricity_field(metric, p: float = 2.0) -> np.ndarray:
    """p-eccentricity (sum_y d(x, y)^p)^(1/p) from a distance matrix.

    Accepts a FunctionGraph carrying a node metric or a square matrix.
    """
    if isinstance(metric, FunctionGraph):
        metric = metric.require_metric()
    d = np.asarray(metric, dtype=float)
    if not p > 0:
        raise SchemaError("p must be positive")
    return (d ** p).sum(axis=1) ** (1.0 / p)


def pagerank_field(graph: FunctionGraph, damping: float = 0.85, tol: float = 1e-12,
                   max_iter: int = 100_000) -> np.ndarray:
    """Stationary PageRank vector with uniform teleportation.

    Each undirected edge counts as two arcs. Iteration stops once the L1 change
    drops below ``tol``.
    """
    if not 0 < damping < 1:
        raise SchemaError("damping must lie in (0, 1)")
    n = graph.n
    if n == 1:
        return np.ones(1)
    src = np.concatenate([graph.edges[:, 0], graph.edges[:, 1]])
    dst = np.concatenate([graph.edges[:, 1], graph.edges[:, 0]])
    deg = np.bincount(src, minlength=n).astype(float)
    x = np.full(n, 1.0 / n)
    for _ in range(max_iter):
        flow = np.bincount(dst, weights=x[src] / deg[src], minlength=n)
        nxt = (1.0 - damping) / n + damping * flow
        if np.abs(nxt - x).sum() < tol:
            return nxt
        x = nxt
    raise NonConvergence(f"PageRank did not converge in {max_iter} iterations")
