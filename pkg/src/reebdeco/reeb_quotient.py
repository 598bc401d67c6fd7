"""Reeb graphs and epsilon-smoothed Reeb graphs of FunctionGraphs."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .core import DecoratedReebGraph, FunctionGraph, SchemaError, ValueMetric, value_distances
from .reeb_radius import reeb_radius_rows


@dataclass(frozen=True)
class QuotientSpec:
    epsilon: float = 0.0
    round_step: Optional[float] = None

    def __post_init__(self):
        if not self.epsilon >= 0:
            raise SchemaError("epsilon must be nonnegative")
        if self.round_step is not None and not self.round_step > 0:
            raise SchemaError("round_step must be positive")


def round_values(graph: FunctionGraph, theta: float) -> FunctionGraph:
    """Snap every value coordinate to the nearest multiple of ``theta``
    (ties to even). Moves each value by at most sqrt(m)/2 * theta."""
    if not theta > 0:
        raise SchemaError("theta must be positive")
    vals = graph.require_values()
    return graph.with_values(theta * np.rint(vals / theta))


def quotient_classes(graph: FunctionGraph, epsilon: float,
                     value_metric: ValueMetric | None = None) -> np.ndarray:
    """Class label per node, labels ordered by smallest member index.

    v ~ w iff g(v) == g(w) and some edge path from v to w stays within
    ``epsilon`` of g(v), i.e. rho(v, w) <= epsilon. Among nodes sharing a value
    this relation is already symmetric and transitive: rho(v, w) = rho(w, v)
    and rho(u, w) <= max(rho(u, v), rho(v, w)).
    """
    vals = graph.require_values()
    n = graph.n
    _, level = np.unique(vals, axis=0, return_inverse=True)
    level = level.ravel()
    e0, e1 = graph.edges[:, 0], graph.edges[:, 1]
    key = np.full(n, -1, dtype=np.int64)
    for lev in range(level.max() + 1):
        members = np.flatnonzero(level == lev)
        near = value_distances(vals, int(members[0]), value_metric) <= epsilon
        keep = near[e0] & near[e1]
        sub = coo_matrix((np.ones(int(keep.sum())), (e0[keep], e1[keep])), shape=(n, n))
        _, comp = connected_components(sub, directed=False)
        key[members] = comp[members] * (level.max() + 1) + lev
    _, first, inv = np.unique(key, return_index=True, return_inverse=True)
    # relabel so class ids follow their smallest node index
    order = np.argsort(first, kind="stable")
    relabel = np.empty_like(order)
    relabel[order] = np.arange(len(order))
    return relabel[inv.ravel()]


def smooth_quotient(graph: FunctionGraph, spec: QuotientSpec | float = 0.0,
                    value_metric: ValueMetric | None = None, *,
                    return_rows: bool = False):
    """Epsilon-smoothed Reeb graph (epsilon = 0 gives the Reeb graph).

    Representatives are the smallest node index of each class. The class
    metric is 2 * max(rho(v, w), rho(w, v)) between representatives. With
    ``return_rows`` the Reeb radius rows of the representatives are returned
    as well (rows indexed by class).
    """
    if not isinstance(spec, QuotientSpec):
        spec = QuotientSpec(float(spec))
    if spec.round_step is not None:
        graph = round_values(graph, spec.round_step)
    class_of = quotient_classes(graph, spec.epsilon, value_metric)
    k = int(class_of.max()) + 1
    rep = np.full(k, graph.n, dtype=np.int64)
    np.minimum.at(rep, class_of, np.arange(graph.n))

    ce = class_of[graph.edges]
    ce = ce[ce[:, 0] != ce[:, 1]]
    edges = np.unique(np.sort(ce, axis=1), axis=0) if len(ce) else np.zeros((0, 2), np.int64)

    rows = reeb_radius_rows(graph, rep, value_metric)
    sub = rows[:, rep]
    metric = 2.0 * np.maximum(sub, sub.T)
    np.fill_diagonal(metric, 0.0)
    params = {"epsilon": spec.epsilon, "round_step": spec.round_step}
    drg = DecoratedReebGraph(k, rep, class_of, edges, metric, (), params, graph.values[rep])
    return (drg, rows) if return_rows else drg
