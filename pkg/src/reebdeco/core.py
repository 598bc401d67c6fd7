"""Shared data model: function graphs, barcodes, persistence images and
decorated Reeb graphs, plus their JSON encodings."""
from __future__ import annotations

import json
import math
from array import array
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Any, Callable, NamedTuple, Optional, Sequence, Union

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial.distance import cdist, squareform

METRIC_TOL = 1e-9


class ReebDecoError(Exception):
    """Base class for all errors raised by the package."""

    exit_code = 1


class SchemaError(ReebDecoError, ValueError):
    exit_code = 2


class NonSimpleError(SchemaError):
    exit_code = 2


class DisconnectedError(ReebDecoError, ValueError):
    exit_code = 3

    def __init__(self, n_components: int, msg: str | None = None):
        self.n_components = n_components
        super().__init__(msg or f"graph is disconnected ({n_components} components)")


class CapacityError(ReebDecoError, RuntimeError):
    exit_code = 4


class SizeError(ReebDecoError, ValueError):
    exit_code = 4


class NonConvergence(ReebDecoError, RuntimeError):
    exit_code = 5


class InfiniteDistance(ReebDecoError, ValueError):
    exit_code = 1


ValueMetric = Callable[[np.ndarray, np.ndarray], np.ndarray]


def value_distances(values: np.ndarray, source: int, metric: ValueMetric | None = None) -> np.ndarray:
    """Distances d_M(g(source), g(v)) for every node v."""
    if metric is not None:
        return np.asarray(metric(values[source], values), dtype=float)
    if values.shape[1] == 1:
        return np.abs(values[:, 0] - values[source, 0])
    return np.sqrt(((values - values[source]) ** 2).sum(axis=1))


def _as_edge_array(edges: Any) -> np.ndarray:
    arr = np.asarray(edges, dtype=np.int64).reshape(-1, 2) if len(edges) else np.zeros((0, 2), np.int64)
    return arr


def canonical_edges(edges: Any, n: int, *, strict: bool = True) -> np.ndarray:
    """Sorted (i < j) unique edge array.

    With ``strict`` a loop or a repeated edge raises :class:`NonSimpleError`;
    otherwise loops are dropped and duplicates collapsed.
    """
    arr = _as_edge_array(edges)
    if arr.size and (arr.min() < 0 or arr.max() >= n):
        raise SchemaError("edge endpoint out of range")
    loops = arr[:, 0] == arr[:, 1]
    if loops.any():
        if strict:
            raise NonSimpleError(f"self-loop at node {int(arr[loops][0, 0])}")
        arr = arr[~loops]
    arr = np.sort(arr, axis=1)
    uniq = np.unique(arr, axis=0) if len(arr) else arr
    if strict and len(uniq) != len(arr):
        raise NonSimpleError("duplicate edge")
    return uniq.reshape(-1, 2)


def count_components(n: int, edges: np.ndarray) -> int:
    if n == 0:
        return 0
    a = coo_matrix((np.ones(len(edges)), (edges[:, 0], edges[:, 1])), shape=(n, n))
    return int(connected_components(a, directed=False)[0])


def check_metric(metric: np.ndarray, tol: float = METRIC_TOL) -> None:
    n = metric.shape[0]
    if metric.shape != (n, n):
        raise SchemaError("node metric must be square")
    if not np.all(np.isfinite(metric)):
        raise SchemaError("node metric has non-finite entries")
    if np.any(metric < -tol) or np.any(np.abs(np.diag(metric)) > tol):
        raise SchemaError("node metric must be nonnegative with zero diagonal")
    if np.any(np.abs(metric - metric.T) > tol):
        raise SchemaError("node metric is not symmetric")
    # d(i,k) <= d(i,j) + d(j,k), one pivot j at a time to keep memory at n^2
    for j in range(n):
        if np.any(metric > metric[:, j:j + 1] + metric[j:j + 1, :] + tol):
            raise SchemaError("node metric violates the triangle inequality")


@dataclass(frozen=True, eq=False)
class FunctionGraph:
    """A connected simple graph with node values in R^m.

    ``values`` may be None for a bare graph (e.g. a fresh kNN graph); every
    Reeb computation requires them.
    """

    n: int
    edges: np.ndarray
    values: Optional[np.ndarray] = None
    node_metric: Optional[np.ndarray] = None
    positions: Optional[np.ndarray] = None
    # skip the O(n^3) triangle check for metrics computed from coordinates
    metric_trusted: bool = field(default=False, repr=False)

    def __post_init__(self):
        n = int(self.n)
        if n < 1:
            raise SchemaError("graph needs at least one node")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "edges", canonical_edges(self.edges, n))
        if self.values is not None:
            vals = np.asarray(self.values, dtype=float)
            if vals.ndim == 1:
                vals = vals[:, None]
            if vals.shape[0] != n or vals.ndim != 2 or vals.shape[1] < 1:
                raise SchemaError("values must give one point of R^m per node")
            if not np.all(np.isfinite(vals)):
                raise SchemaError("values must be finite")
            object.__setattr__(self, "values", vals)
        if self.node_metric is not None:
            met = np.asarray(self.node_metric, dtype=float)
            if not self.metric_trusted:
                check_metric(met)
            if met.shape[0] != n:
                raise SchemaError("node metric size does not match node count")
            object.__setattr__(self, "node_metric", met)
        if self.positions is not None:
            pos = np.asarray(self.positions, dtype=float)
            if pos.ndim == 1:
                pos = pos[:, None]
            if pos.shape[0] != n:
                raise SchemaError("positions must have one row per node")
            object.__setattr__(self, "positions", pos)
        n_comp = count_components(n, self.edges)
        if n_comp != 1:
            raise DisconnectedError(n_comp)

    @cached_property
    def adjacency(self) -> list[list[int]]:
        """Neighbor lists sorted by index."""
        adj: list[list[int]] = [[] for _ in range(self.n)]
        for i, j in self.edges.tolist():
            adj[i].append(j)
            adj[j].append(i)
        for nb in adj:
            nb.sort()
        return adj

    @cached_property
    def csr(self) -> tuple[array, array]:
        """(indptr, indices) of the symmetric adjacency, neighbors sorted.
        Flat typed arrays keep the hot loop of the Reeb radius cache friendly."""
        e = self.edges
        both = np.concatenate([e, e[:, ::-1]]) if len(e) else np.zeros((0, 2), np.int64)
        order = np.lexsort((both[:, 1], both[:, 0]))
        indptr = np.zeros(self.n + 1, np.int64)
        np.cumsum(np.bincount(both[:, 0], minlength=self.n), out=indptr[1:])
        return array("q", indptr.tobytes()), array("q", both[order, 1].astype(np.int64).tobytes())

    @property
    def value_dim(self) -> int:
        return 0 if self.values is None else self.values.shape[1]

    def require_values(self) -> np.ndarray:
        if self.values is None:
            raise SchemaError("graph has no node values; compute a field first")
        return self.values

    def require_metric(self) -> np.ndarray:
        if self.node_metric is None:
            raise SchemaError("operation needs a node metric")
        return self.node_metric

    def with_values(self, values) -> "FunctionGraph":
        return FunctionGraph(self.n, self.edges, values, self.node_metric, self.positions, True)

    def __eq__(self, other):
        if not isinstance(other, FunctionGraph):
            return NotImplemented
        return self.n == other.n and all(
            _arr_eq(getattr(self, f), getattr(other, f))
            for f in ("edges", "values", "node_metric", "positions")
        )

    __hash__ = None


def _arr_eq(a, b) -> bool:
    if a is None or b is None:
        return a is None and b is None
    return a.shape == b.shape and bool(np.array_equal(a, b))


class Interval(NamedTuple):
    dim: int
    birth: float
    death: Optional[float]  # None: open at the truncation scale

    @property
    def is_open(self) -> bool:
        return self.death is None


@dataclass(frozen=True)
class Barcode:
    """Multiset of persistence intervals. Open intervals survive to ``r_max``."""

    intervals: tuple[Interval, ...] = ()
    r_max: Optional[float] = None

    def __post_init__(self):
        ivs = []
        for iv in self.intervals:
            iv = Interval(int(iv[0]), float(iv[1]), None if iv[2] is None else float(iv[2]))
            if iv.dim < 0 or iv.birth < 0 or (iv.death is not None and iv.death < iv.birth):
                raise SchemaError(f"invalid interval {iv}")
            ivs.append(iv)
        ivs.sort(key=lambda iv: (iv.dim, iv.birth, math.inf if iv.death is None else iv.death))
        object.__setattr__(self, "intervals", tuple(ivs))
        if any(iv.death is None for iv in ivs) and self.r_max is None:
            raise SchemaError("open intervals need r_max")
        if self.r_max is not None:
            object.__setattr__(self, "r_max", float(self.r_max))

    def __len__(self):
        return len(self.intervals)

    def in_dim(self, k: int) -> "Barcode":
        return Barcode(tuple(iv for iv in self.intervals if iv.dim == k), self.r_max)

    def finite_pairs(self) -> np.ndarray:
        return np.array([(iv.birth, iv.death) for iv in self.intervals if iv.death is not None],
                        dtype=float).reshape(-1, 2)

    def open_births(self) -> np.ndarray:
        return np.array([iv.birth for iv in self.intervals if iv.death is None], dtype=float)

    def clipped(self, r_max: float | None = None) -> np.ndarray:
        """(birth, death) array with open deaths replaced by ``r_max``."""
        cap = self.r_max if r_max is None else r_max
        return np.array([(iv.birth, cap if iv.death is None else iv.death) for iv in self.intervals],
                        dtype=float).reshape(-1, 2)

    def persistence(self) -> np.ndarray:
        pairs = self.clipped()
        return pairs[:, 1] - pairs[:, 0]


@dataclass(frozen=True, eq=False)
class PersistenceImage:
    resolution: tuple[int, int]
    birth_range: tuple[float, float]
    pers_range: tuple[float, float]
    sigma: float
    pixels: np.ndarray  # rows: persistence axis, cols: birth axis

    def __post_init__(self):
        px = np.asarray(self.pixels, dtype=float)
        res = (int(self.resolution[0]), int(self.resolution[1]))
        if px.ndim == 1:
            px = px.reshape(res)
        if px.shape != res:
            raise SchemaError("pixel grid does not match resolution")
        if np.any(px < 0):
            raise SchemaError("negative pixel")
        object.__setattr__(self, "pixels", px)
        object.__setattr__(self, "resolution", res)
        object.__setattr__(self, "birth_range", (float(self.birth_range[0]), float(self.birth_range[1])))
        object.__setattr__(self, "pers_range", (float(self.pers_range[0]), float(self.pers_range[1])))
        object.__setattr__(self, "sigma", float(self.sigma))

    def vector(self) -> np.ndarray:
        return self.pixels.ravel()

    def __eq__(self, other):
        if not isinstance(other, PersistenceImage):
            return NotImplemented
        return (self.resolution == other.resolution and self.birth_range == other.birth_range
                and self.pers_range == other.pers_range and self.sigma == other.sigma
                and np.array_equal(self.pixels, other.pixels))

    __hash__ = None


Decoration = Union[Barcode, PersistenceImage, None]


@dataclass(frozen=True, eq=False)
class DecoratedReebGraph:
    """Quotient graph of a FunctionGraph with per-class decorations.

    ``metric`` is the square matrix of the symmetrized Reeb distance between
    class representatives.
    """

    class_count: int
    representative: np.ndarray
    class_of: np.ndarray
    edges: np.ndarray
    metric: np.ndarray
    decorations: tuple = ()
    params: dict = field(default_factory=dict)
    values: Optional[np.ndarray] = None  # class values, render/report only

    def __post_init__(self):
        k = int(self.class_count)
        object.__setattr__(self, "class_count", k)
        rep = np.asarray(self.representative, dtype=np.int64)
        cls = np.asarray(self.class_of, dtype=np.int64)
        if rep.shape != (k,):
            raise SchemaError("one representative per class required")
        if cls.size and (cls.min() < 0 or cls.max() >= k):
            raise SchemaError("class_of out of range")
        if np.unique(cls).size != k:
            raise SchemaError("class_of must be surjective")
        if not np.array_equal(cls[rep], np.arange(k)):
            raise SchemaError("representative must be a section of class_of")
        met = np.asarray(self.metric, dtype=float)
        if met.ndim == 1:
            met = squareform(met) if met.size else np.zeros((k, k))
        if met.shape != (k, k):
            raise SchemaError("metric must be class_count x class_count")
        if not np.array_equal(met, met.T) or np.any(np.diag(met) != 0) or np.any(met < 0):
            raise SchemaError("quotient metric must be symmetric, nonnegative, zero diagonal")
        decs = tuple(self.decorations) if len(self.decorations) else (None,) * k
        if len(decs) != k:
            raise SchemaError("one decoration slot per class required")
        object.__setattr__(self, "representative", rep)
        object.__setattr__(self, "class_of", cls)
        object.__setattr__(self, "edges", canonical_edges(self.edges, k))
        object.__setattr__(self, "metric", met)
        object.__setattr__(self, "decorations", decs)
        object.__setattr__(self, "params", dict(self.params))
        if self.values is not None:
            object.__setattr__(self, "values", np.asarray(self.values, dtype=float).reshape(k, -1))

    def with_decorations(self, decorations: Sequence[Decoration], **params) -> "DecoratedReebGraph":
        return DecoratedReebGraph(self.class_count, self.representative, self.class_of, self.edges,
                                  self.metric, tuple(decorations), {**self.params, **params}, self.values)

    def __eq__(self, other):
        if not isinstance(other, DecoratedReebGraph):
            return NotImplemented
        return (self.class_count == other.class_count
                and np.array_equal(self.representative, other.representative)
                and np.array_equal(self.class_of, other.class_of)
                and np.array_equal(self.edges, other.edges)
                and np.array_equal(self.metric, other.metric)
                and _arr_eq(self.values, other.values)
                and self.params == other.params
                and all(a == b for a, b in zip(self.decorations, other.decorations)))

    __hash__ = None


# --------------------------------------------------------------------------
# JSON encodings. Python's float repr round-trips exactly, so json.dumps
# already writes reals at full precision.

def _load_doc(doc):
    if isinstance(doc, (bytes, bytearray)):
        doc = doc.decode()
    if isinstance(doc, str):
        try:
            return json.loads(doc)
        except json.JSONDecodeError as e:
            raise SchemaError(f"invalid JSON: {e}") from e
    return doc


def graph_to_dict(g: FunctionGraph) -> dict:
    out: dict[str, Any] = {"n": g.n, "edges": g.edges.tolist(),
                           "values": None if g.values is None else g.values.tolist()}
    if g.node_metric is not None:
        out["metric"] = g.node_metric.tolist()
    if g.positions is not None:
        out["positions"] = g.positions.tolist()
    return out


def save_function_graph(g: FunctionGraph) -> str:
    return json.dumps(graph_to_dict(g))


def load_function_graph(doc) -> FunctionGraph:
    d = _load_doc(doc)
    if not isinstance(d, dict):
        raise SchemaError("graph document must be an object")
    try:
        n = d["n"]
        edges = d["edges"]
    except KeyError as e:
        raise SchemaError(f"missing field {e}") from e
    if not isinstance(n, int) or isinstance(n, bool):
        raise SchemaError("n must be an integer")
    if not isinstance(edges, list) or any(not isinstance(e, list) or len(e) != 2 for e in edges):
        raise SchemaError("edges must be a list of [i, j] pairs")
    if any(not isinstance(v, int) or isinstance(v, bool) for e in edges for v in e):
        raise SchemaError("edge endpoints must be integers")
    extra = set(d) - {"n", "edges", "values", "metric", "positions"}
    if extra:
        raise SchemaError(f"unknown fields {sorted(extra)}")
    try:
        values = None if d.get("values") is None else np.array(d["values"], dtype=float)
        metric = None if d.get("metric") is None else np.array(d["metric"], dtype=float)
        positions = None if d.get("positions") is None else np.array(d["positions"], dtype=float)
    except (TypeError, ValueError) as e:
        raise SchemaError(f"malformed numeric array: {e}") from e
    if values is not None and values.ndim == 2 and values.shape[0] != n:
        raise SchemaError("values length does not match n")
    if values is not None and values.ndim not in (1, 2):
        raise SchemaError("values must be a list of reals or of real vectors")
    if metric is not None and metric.shape != (n, n):
        raise SchemaError("metric must be n x n")
    # a metric that is the Euclidean distance of the positions needs no triangle check
    trusted = (metric is not None and positions is not None and positions.ndim == 2
               and positions.shape[0] == n and bool(np.all(np.isfinite(positions)))
               and bool(np.all(np.abs(metric - cdist(positions, positions)) <= METRIC_TOL)))
    return FunctionGraph(n, edges, values, metric, positions, trusted)


def barcode_to_list(b: Barcode) -> list:
    return [{"dim": iv.dim, "birth": iv.birth,
             "death": {"open_at": b.r_max} if iv.death is None else iv.death}
            for iv in b.intervals]


def barcode_from_list(items: list, r_max: float | None = None) -> Barcode:
    ivs = []
    for it in items:
        death = it["death"]
        if isinstance(death, dict):
            r_max = float(death["open_at"]) if r_max is None else r_max
            death = None
        ivs.append(Interval(it["dim"], it["birth"], death))
    return Barcode(tuple(ivs), r_max)


def _decoration_to_json(dec: Decoration):
    if dec is None:
        return None
    if isinstance(dec, Barcode):
        return {"type": "barcode", "r_max": dec.r_max, "intervals": barcode_to_list(dec)}
    return {"type": "image", "resolution": list(dec.resolution), "birth_range": list(dec.birth_range),
            "pers_range": list(dec.pers_range), "sigma": dec.sigma, "pixels": dec.pixels.ravel().tolist()}


def _decoration_from_json(d) -> Decoration:
    if d is None:
        return None
    if d["type"] == "barcode":
        return barcode_from_list(d["intervals"], d.get("r_max"))
    if d["type"] == "image":
        return PersistenceImage(tuple(d["resolution"]), tuple(d["birth_range"]), tuple(d["pers_range"]),
                                d["sigma"], np.array(d["pixels"], dtype=float))
    raise SchemaError(f"unknown decoration type {d['type']!r}")


def drg_to_dict(drg: DecoratedReebGraph) -> dict:
    out = {
        "classes": drg.class_count,
        "representative": drg.representative.tolist(),
        "class_of": drg.class_of.tolist(),
        "edges": drg.edges.tolist(),
        "metric": squareform(drg.metric, checks=False).tolist() if drg.class_count > 1 else [],
        "decorations": [_decoration_to_json(d) for d in drg.decorations],
        "params": drg.params,
    }
    if drg.values is not None:
        out["values"] = drg.values.tolist()
    return out


def save_drg(drg: DecoratedReebGraph, indent: int | None = None) -> str:
    return json.dumps(drg_to_dict(drg), indent=indent, allow_nan=False)


def load_drg(doc) -> DecoratedReebGraph:
    d = _load_doc(doc)
    try:
        k = d["classes"]
        met = np.array(d["metric"], dtype=float)
        metric = squareform(met, checks=False) if k > 1 else np.zeros((k, k))
        return DecoratedReebGraph(
            k, d["representative"], d["class_of"], d["edges"], metric,
            tuple(_decoration_from_json(x) for x in d["decorations"]), d.get("params", {}),
            d.get("values"))
    except (KeyError, TypeError, ValueError) as e:
        if isinstance(e, SchemaError):
            raise
        raise SchemaError(f"malformed DRG document: {e}") from e


def load_point_cloud_csv(path_or_text: str, *, is_text: bool = False) -> np.ndarray:
    """Read one point per row; a non-numeric first row is treated as a header."""
    text = path_or_text if is_text else Path(path_or_text).read_text()
    rows = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not rows:
        raise SchemaError("empty point cloud")
    out = []
    for i, ln in enumerate(rows):
        try:
            out.append([float(x) for x in ln.split(",")])
        except ValueError:
            if i == 0:
                continue
            raise SchemaError(f"non-numeric entry on row {i}") from None
    if not out:
        raise SchemaError("empty point cloud")
    if len({len(r) for r in out}) != 1:
        raise SchemaError("rows have different dimensions")
    return np.array(out, dtype=float)
