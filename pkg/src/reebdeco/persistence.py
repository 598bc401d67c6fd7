"""Vietoris-Rips filtrations, persistence over Z/2 and bottleneck distance."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Optional, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching

from .core import Barcode, CapacityError, InfiniteDistance, Interval, SchemaError

DEFAULT_CAPACITY = 5_000_000


@dataclass(frozen=True)
class SliceSchedule:
    """Vertex y enters the filtration once rho(y) <= lam * r + c."""

    lam: float = 1.0
    c: float = 0.0

    def __post_init__(self):
        if not (self.lam >= 0 and self.c >= 0):
            raise SchemaError("lambda and c must be nonnegative")

    def appearance(self, rho: np.ndarray) -> np.ndarray:
        rho = np.asarray(rho, dtype=float)
        if self.lam == 0:
            return np.where(rho <= self.c, 0.0, np.inf)
        return np.maximum(0.0, (rho - self.c) / self.lam)


@dataclass(frozen=True, eq=False)
class RipsSkeleton:
    """Every clique of the r_max-neighborhood graph up to ``max_dim``, with its
    diameter. Independent of any vertex schedule, so one skeleton serves all
    anchors of a decoration run."""

    simplices: tuple
    diameters: tuple
    max_dim: int
    r_max: float
    n_points: int


@dataclass(frozen=True, eq=False)
class FilteredComplex:
    """Simplices per dimension, each block sorted by (scale, vertices).

    ``simplices[d]`` is an (N_d, d + 1) int array of sorted vertex tuples and
    ``scales[d]`` their appearance scales. Concatenating the blocks in
    (scale, dim) order gives the full filtration order.
    """

    simplices: tuple
    scales: tuple
    max_dim: int
    r_max: float
    n_points: int

    def __len__(self):
        return sum(len(s) for s in self.simplices)

    def count(self, dim: int) -> int:
        return len(self.simplices[dim]) if dim < len(self.simplices) else 0

    def __iter__(self) -> Iterator[tuple[tuple[int, ...], float]]:
        """Simplices in global order (scale, dimension, lexicographic)."""
        entries = []
        for d, (s, f) in enumerate(zip(self.simplices, self.scales)):
            for row, val in zip(s.tolist(), f.tolist()):
                entries.append((val, d, tuple(row)))
        entries.sort()
        for val, _, row in entries:
            yield row, val


def _check_metric_matrix(metric) -> np.ndarray:
    d = np.asarray(metric, dtype=float)
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        raise SchemaError("metric must be a square matrix")
    return d


def rips_skeleton(metric, r_max: float, max_dim: int, capacity: int = DEFAULT_CAPACITY) -> RipsSkeleton:
    d = _check_metric_matrix(metric)
    n = d.shape[0]
    if max_dim < 0:
        raise SchemaError("max_dim must be nonnegative")
    near = d <= r_max
    np.fill_diagonal(near, False)
    simplices = [np.arange(n).reshape(-1, 1)]
    diameters = [np.zeros(n)]
    total = n
    for dim in range(1, max_dim + 1):
        prev, prev_diam = simplices[-1], diameters[-1]
        new_s, new_d = [], []
        # extend each simplex by a larger vertex adjacent to all of its vertices
        chunk = max(1, 4_000_000 // max(n, 1))
        for start in range(0, len(prev), chunk):
            block = prev[start:start + chunk]
            common = near[block[:, 0]].copy()
            for c in range(1, block.shape[1]):
                common &= near[block[:, c]]
            common &= np.arange(n)[None, :] > block[:, -1:]
            rows, w = np.nonzero(common)
            total += len(rows)
            if total > capacity:
                raise CapacityError(f"Rips complex exceeds {capacity} simplices")
            ext = np.concatenate([block[rows], w[:, None]], axis=1)
            diam = prev_diam[start:start + chunk][rows]
            for c in range(block.shape[1]):
                diam = np.maximum(diam, d[block[rows, c], w])
            new_s.append(ext)
            new_d.append(diam)
        simplices.append(np.concatenate(new_s) if new_s else np.zeros((0, dim + 1), np.int64))
        diameters.append(np.concatenate(new_d) if new_d else np.zeros(0))
    return RipsSkeleton(tuple(simplices), tuple(diameters), max_dim, float(r_max), n)


def filtration_from_skeleton(skel: RipsSkeleton, appearance: Optional[np.ndarray] = None) -> FilteredComplex:
    """Scale of a simplex = max(diameter, latest vertex appearance); anything
    beyond r_max is dropped."""
    out_s, out_f = [], []
    for s, diam in zip(skel.simplices, skel.diameters):
        scale = diam if appearance is None else np.maximum(diam, appearance[s].max(axis=1))
        keep = scale <= skel.r_max
        s, scale = s[keep], scale[keep]
        order = np.lexsort(tuple(s[:, c] for c in range(s.shape[1] - 1, -1, -1)) + (scale,))
        out_s.append(s[order])
        out_f.append(scale[order])
    return FilteredComplex(tuple(out_s), tuple(out_f), skel.max_dim, skel.r_max, skel.n_points)


def default_r_max(metric) -> float:
    d = _check_metric_matrix(metric)
    return float(d.max()) if d.size else 0.0


def vr_filtration(metric, r_max: float | None = None, max_dim: int = 2,
                  capacity: int = DEFAULT_CAPACITY) -> FilteredComplex:
    if r_max is None:
        r_max = default_r_max(metric)
    return filtration_from_skeleton(rips_skeleton(metric, r_max, max_dim, capacity))


def constrained_vr_filtration(metric, rho, schedule: SliceSchedule, r_max: float | None = None,
                              max_dim: int = 2, capacity: int = DEFAULT_CAPACITY,
                              skeleton: RipsSkeleton | None = None) -> FilteredComplex:
    """Rips filtration where point y only exists from scale (rho(y) - c) / lam on."""
    appearance = schedule.appearance(rho)
    if skeleton is None:
        if r_max is None:
            finite = appearance[np.isfinite(appearance)]
            r_max = max(default_r_max(metric), float(finite.max()) if finite.size else 0.0)
        skeleton = rips_skeleton(metric, r_max, max_dim, capacity)
    return filtration_from_skeleton(skeleton, appearance)


# ---------------------------------------------------------------------------
# reduction

def _encode(rows: np.ndarray, base: int) -> np.ndarray:
    key = np.zeros(len(rows), dtype=np.int64)
    for c in range(rows.shape[1]):
        key = key * base + rows[:, c]
    return key


def _face_index(lower: np.ndarray, upper: np.ndarray, base: int) -> np.ndarray:
    """For each row of ``upper``, the positions in ``lower`` of its facets."""
    if len(upper) == 0:
        return np.zeros((0, upper.shape[1]), dtype=np.int64)
    keys = _encode(lower, base)
    order = np.argsort(keys, kind="stable")
    sorted_keys = keys[order]
    out = np.empty(upper.shape, dtype=np.int64)
    for drop in range(upper.shape[1]):
        facet = np.delete(upper, drop, axis=1)
        pos = np.searchsorted(sorted_keys, _encode(facet, base))
        out[:, drop] = order[pos]
    return out


def _coboundary_csr(cx: FilteredComplex, d: int):
    n_d = cx.count(d)
    if d + 1 > cx.max_dim or cx.count(d + 1) == 0:
        return np.zeros(n_d + 1, dtype=np.int64), np.zeros(0, dtype=np.int64)
    faces = _face_index(cx.simplices[d], cx.simplices[d + 1], max(cx.n_points, 1))
    flat_f = faces.ravel()
    flat_t = np.repeat(np.arange(len(faces)), faces.shape[1])
    order = np.argsort(flat_f, kind="stable")
    indptr = np.zeros(n_d + 1, dtype=np.int64)
    np.cumsum(np.bincount(flat_f, minlength=n_d), out=indptr[1:])
    return indptr, flat_t[order]


def persistence_intervals(cx: FilteredComplex, max_k: int) -> list[Interval]:
    """Intervals of degrees 0..max_k.

    Reduces the coboundary matrix (cohomology), dimension by dimension, with
    clearing: a d-simplex that was a death in degree d - 1 has a zero reduced
    coboundary and is skipped. Over a field this pairing coincides with the
    homology pairing.
    """
    if max_k > cx.max_dim - 1:
        raise SchemaError(f"degree {max_k} needs simplices of dimension {max_k + 1}")
    out: list[Interval] = []
    cleared: set[int] = set()
    for d in range(max_k + 1):
        scale_d = cx.scales[d].tolist()
        scale_up = cx.scales[d + 1].tolist()
        indptr, cob = _coboundary_csr(cx, d)
        indptr = indptr.tolist()
        owner: dict[int, int] = {}
        reduced: dict[int, set] = {}
        next_cleared: set[int] = set()
        for i in range(cx.count(d) - 1, -1, -1):
            if i in cleared:
                continue
            lo, hi = indptr[i], indptr[i + 1]
            if lo == hi:
                out.append(Interval(d, scale_d[i], None))
                continue
            col = None
            pivot = int(cob[lo])  # CSR rows are sorted, so the first entry is the minimum
            while pivot in owner:
                if col is None:
                    col = set(cob[lo:hi].tolist())
                j = owner[pivot]
                other = reduced.get(j)
                if other is None:
                    other = cob[indptr[j]:indptr[j + 1]].tolist()
                col.symmetric_difference_update(other)
                if not col:
                    pivot = -1
                    break
                pivot = min(col)
            if pivot < 0:
                out.append(Interval(d, scale_d[i], None))
                continue
            owner[pivot] = i
            if col is not None:
                reduced[i] = col
            next_cleared.add(pivot)
            if scale_up[pivot] > scale_d[i]:
                out.append(Interval(d, scale_d[i], scale_up[pivot]))
        cleared = next_cleared
    return out


def reduce_and_extract(cx: FilteredComplex, k: int) -> Barcode:
    """Degree-k barcode; zero-length bars dropped, essential bars open at r_max."""
    ivs = [iv for iv in persistence_intervals(cx, k) if iv.dim == k]
    return Barcode(tuple(ivs), cx.r_max)


def all_barcodes(cx: FilteredComplex, max_k: int) -> Barcode:
    return Barcode(tuple(persistence_intervals(cx, max_k)), cx.r_max)


# ---------------------------------------------------------------------------
# bottleneck distance

def _linf(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.maximum(np.abs(a[:, None, 0] - b[None, :, 0]), np.abs(a[:, None, 1] - b[None, :, 1]))


def _has_perfect_matching(a: np.ndarray, b: np.ndarray, cross: np.ndarray, t: float) -> bool:
    na, nb = len(a), len(b)
    size = na + nb
    # left: points of a, then diagonal slots for b; right: points of b, then slots for a
    adj = np.zeros((size, size), dtype=bool)
    adj[:na, :nb] = cross <= t
    adj[np.arange(na), nb + np.arange(na)] = (a[:, 1] - a[:, 0]) / 2 <= t
    adj[na + np.arange(nb), np.arange(nb)] = (b[:, 1] - b[:, 0]) / 2 <= t
    adj[na:, nb:] = True
    match = maximum_bipartite_matching(csr_matrix(adj), perm_type="column")
    return bool(np.all(match >= 0))


def _bottleneck_finite(a: np.ndarray, b: np.ndarray) -> float:
    if len(a) == 0 and len(b) == 0:
        return 0.0
    cross = _linf(a, b)
    cands = np.unique(np.concatenate([cross.ravel(), (a[:, 1] - a[:, 0]) / 2, (b[:, 1] - b[:, 0]) / 2, [0.0]]))
    lo, hi = 0, len(cands) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if _has_perfect_matching(a, b, cross, cands[mid]):
            hi = mid
        else:
            lo = mid + 1
    return float(cands[lo])


def bottleneck(b1: Barcode, b2: Barcode, dim: int | None = None) -> float:
    """Bottleneck distance between two barcodes (optionally restricted to one
    degree). Open bars only match open bars, at cost |birth difference|."""
    if dim is not None:
        b1, b2 = b1.in_dim(dim), b2.in_dim(dim)
    elif len({iv.dim for iv in b1.intervals} | {iv.dim for iv in b2.intervals}) > 1:
        dims = sorted({iv.dim for iv in b1.intervals} | {iv.dim for iv in b2.intervals})
        return max(bottleneck(b1, b2, k) for k in dims)
    o1, o2 = np.sort(b1.open_births()), np.sort(b2.open_births())
    if len(o1) != len(o2):
        raise InfiniteDistance(f"open bar counts differ ({len(o1)} vs {len(o2)})")
    d_open = float(np.abs(o1 - o2).max()) if len(o1) else 0.0
    return max(d_open, _bottleneck_finite(b1.finite_pairs(), b2.finite_pairs()))


def bottleneck_matrix(barcodes: Sequence[Barcode], others: Sequence[Barcode] | None = None,
                      dim: int | None = None) -> np.ndarray:
    sym = others is None
    others = barcodes if others is None else others
    out = np.zeros((len(barcodes), len(others)))
    for i, x in enumerate(barcodes):
        for j, y in enumerate(others):
            if sym and j < i:
                out[i, j] = out[j, i]
            elif not (sym and i == j):
                try:
                    out[i, j] = bottleneck(x, y, dim)
                except InfiniteDistance:
                    out[i, j] = math.inf
    return out
