"""Directed Reeb radius on graphs.

``reeb_radius_from`` is a Dijkstra variant: a node's radius is fixed the
first time it is reached, as the max of its discoverer's radius and its own
value distance from the source. The brute-force oracles enumerate simple
paths and exist to check it on small graphs.
"""
from __future__ import annotations

import heapq
import math
from array import array
from dataclasses import dataclass

import numpy as np

from .core import FunctionGraph, SizeError, ValueMetric, value_distances

ORACLE_MAX_NODES = 12


@dataclass(frozen=True, eq=False)
class ReebRadiusField:
    source: int
    rho: np.ndarray


def reeb_radius_from(graph: FunctionGraph, x: int, value_metric: ValueMetric | None = None) -> ReebRadiusField:
    dist = array("d", value_distances(graph.require_values(), x, value_metric).tobytes())
    indptr, indices = graph.csr
    inf = math.inf
    rho = array("d", [inf]) * graph.n
    rho[x] = 0.0
    # (rho, node) keys: ties pop the smaller index first
    queue = [(0.0, x)]
    pop, push = heapq.heappop, heapq.heappush
    while queue:
        r, v = pop(queue)
        for w in indices[indptr[v]:indptr[v + 1]]:
            if rho[w] == inf:
                dw = dist[w]
                rw = dw if dw > r else r
                rho[w] = rw
                push(queue, (rw, w))
    return ReebRadiusField(x, np.frombuffer(rho, dtype=float).copy())


def reeb_radius_rows(graph: FunctionGraph, sources, value_metric: ValueMetric | None = None) -> np.ndarray:
    return np.array([reeb_radius_from(graph, int(s), value_metric).rho for s in sources]).reshape(-1, graph.n)


def reeb_radius_matrix(graph: FunctionGraph, value_metric: ValueMetric | None = None) -> np.ndarray:
    """Row x holds rho(x, .)."""
    return reeb_radius_rows(graph, range(graph.n), value_metric)


def _simple_paths(graph: FunctionGraph, x: int, y: int):
    if graph.n > ORACLE_MAX_NODES:
        raise SizeError(f"path enumeration limited to {ORACLE_MAX_NODES} nodes (got {graph.n})")
    adj = graph.adjacency
    path = [x]
    on_path = [False] * graph.n
    on_path[x] = True

    def walk(v):
        if v == y:
            yield list(path)
            return
        for w in adj[v]:
            if not on_path[w]:
                on_path[w] = True
                path.append(w)
                yield from walk(w)
                path.pop()
                on_path[w] = False

    yield from walk(x)


# Only simple paths are enumerated: cutting a cycle out of a path removes
# nodes, so neither the max distance from g(x) nor the diameter can grow.

def oracle_reeb_radius(graph: FunctionGraph, x: int, y: int, value_metric: ValueMetric | None = None) -> float:
    dist = value_distances(graph.require_values(), x, value_metric).tolist()
    return min(max(dist[v] for v in p) for p in _simple_paths(graph, x, y))


def oracle_reeb_distance(graph: FunctionGraph, x: int, y: int, value_metric: ValueMetric | None = None) -> float:
    values = graph.require_values()
    rows = np.array([value_distances(values, v, value_metric) for v in range(graph.n)])
    best = math.inf
    for p in _simple_paths(graph, x, y):
        best = min(best, float(rows[np.ix_(p, p)].max()))
    return best
