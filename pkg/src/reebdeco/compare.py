"""Comparing metric fields and decorated Reeb graphs.

Exact Gromov-Hausdorff variants are computed by branch and bound over
correspondences and are only meant for a handful of points. Fused
Gromov-Wasserstein is the practical comparison between decorated graphs.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.spatial.distance import cdist

from .core import (Barcode, DecoratedReebGraph, FunctionGraph, NonConvergence, PersistenceImage, SchemaError,
                   SizeError)
from .persistence import bottleneck_matrix
from .reeb_quotient import smooth_quotient
from .reeb_radius import reeb_radius_matrix

BRUTE_MAX_SIZE = 6


@dataclass(frozen=True)
class Correspondence:
    pairs: frozenset

    @classmethod
    def of(cls, pairs: Iterable, n1: int, n2: int) -> "Correspondence":
        ps = frozenset((int(a), int(b)) for a, b in pairs)
        if {a for a, _ in ps} != set(range(n1)) or {b for _, b in ps} != set(range(n2)):
            raise SchemaError("correspondence projections must be surjective")
        return cls(ps)

    @classmethod
    def identity(cls, n: int) -> "Correspondence":
        return cls(frozenset((i, i) for i in range(n)))


@dataclass(frozen=True)
class ConnectivityConstants:
    L: float
    eps: float


def _field_values(f: FunctionGraph) -> np.ndarray:
    return f.require_values()


def check_rs_correspondence(f1: FunctionGraph, f2: FunctionGraph, corr: Correspondence) -> tuple[float, float]:
    """Smallest (r, s) making ``corr`` an (r, s)-correspondence: r is half the
    metric distortion, s the largest value discrepancy over matched pairs."""
    Correspondence.of(corr.pairs, f1.n, f2.n)
    d1, d2 = f1.require_metric(), f2.require_metric()
    a = np.array([p[0] for p in sorted(corr.pairs)])
    b = np.array([p[1] for p in sorted(corr.pairs)])
    r = float(np.abs(d1[np.ix_(a, a)] - d2[np.ix_(b, b)]).max()) / 2
    s = float(cdist(_field_values(f1)[a], _field_values(f2)[b]).diagonal().max())
    return r, s


def min_correspondence(d1: np.ndarray, d2: np.ndarray, cost: np.ndarray, max_size: int = BRUTE_MAX_SIZE) -> float:
    """min over correspondences R of max(distortion(R) / 2, max_{(i,j) in R} cost[i, j]).

    The objective only grows when pairs are added, so it suffices to search
    correspondences made of one partner per x plus one partner for each y left
    uncovered. Branch and bound over those choices gives the exact minimum.
    """
    n1, n2 = len(d1), len(d2)
    if max(n1, n2) > max_size:
        raise SizeError(f"brute-force GH limited to {max_size} points (got {n1} and {n2})")
    half = np.abs(d1[:, None, :, None] - d2[None, :, None, :]) / 2  # [i, j, k, l]
    half_l = half.tolist()
    cost_l = np.asarray(cost, dtype=float).tolist()
    best = [math.inf]
    chosen: list[tuple[int, int]] = []
    covered = [0] * n2

    def added_cost(i, j, cur):
        c = max(cur, cost_l[i][j])
        hij = half_l[i][j]
        for k, l in chosen:
            v = hij[k][l]
            if v > c:
                c = v
        return c

    def fill_y(j, cur):
        if cur >= best[0]:
            return
        while j < n2 and covered[j]:
            j += 1
        if j == n2:
            best[0] = cur
            return
        for i in sorted(range(n1), key=lambda i: cost_l[i][j]):
            c = added_cost(i, j, cur)
            if c < best[0]:
                chosen.append((i, j))
                covered[j] += 1
                fill_y(j + 1, c)
                covered[j] -= 1
                chosen.pop()

    def fill_x(i, cur):
        if cur >= best[0]:
            return
        if i == n1:
            fill_y(0, cur)
            return
        for j in sorted(range(n2), key=lambda j: cost_l[i][j]):
            c = added_cost(i, j, cur)
            if c < best[0]:
                chosen.append((i, j))
                covered[j] += 1
                fill_x(i + 1, c)
                covered[j] -= 1
                chosen.pop()

    fill_x(0, 0.0)
    return best[0]


def field_gh(d1, v1, d2, v2, max_size: int = BRUTE_MAX_SIZE) -> float:
    """GH distance between metric fields given as (metric, values) arrays."""
    v1 = np.asarray(v1, dtype=float).reshape(len(d1), -1)
    v2 = np.asarray(v2, dtype=float).reshape(len(d2), -1)
    return min_correspondence(np.asarray(d1), np.asarray(d2), cdist(v1, v2), max_size)


def brute_gh(f1: FunctionGraph, f2: FunctionGraph, max_size: int = BRUTE_MAX_SIZE) -> float:
    """Exact GH distance between metric fields: infimum of r over (r, r)-correspondences."""
    return field_gh(f1.require_metric(), _field_values(f1), f2.require_metric(), _field_values(f2), max_size)


def decorated_gh(f1: FunctionGraph, f2: FunctionGraph, max_size: int = BRUTE_MAX_SIZE) -> float:
    """Exact GH distance between Reeb graphs decorated with their Reeb radius
    filtrations: the smallest r with a class correspondence of distortion
    <= 2r whose matched classes carry decorations within GH distance r.

    Each matched pair may use its own inner correspondence, which can only
    lower the value compared with a single shared one.
    """
    out = []
    for f in (f1, f2):
        drg = smooth_quotient(f, 0.0)
        rho = reeb_radius_matrix(f)
        out.append((drg, rho))
    (q1, rho1), (q2, rho2) = out
    inner = np.zeros((q1.class_count, q2.class_count))
    d1, d2 = f1.require_metric(), f2.require_metric()
    for a, ra in enumerate(q1.representative):
        for b, rb in enumerate(q2.representative):
            inner[a, b] = field_gh(d1, rho1[ra], d2, rho2[rb], max_size)
    return min_correspondence(q1.metric, q2.metric, inner, max_size)


def barcode_decorated_gh(drg1: DecoratedReebGraph, drg2: DecoratedReebGraph,
                         max_size: int = BRUTE_MAX_SIZE) -> float:
    """Exact GH distance between quotient graphs decorated with barcodes, the
    value discrepancy being the bottleneck distance."""
    for drg in (drg1, drg2):
        if not all(isinstance(d, Barcode) for d in drg.decorations):
            raise SchemaError("every class needs a barcode decoration")
    cost = bottleneck_matrix(list(drg1.decorations), list(drg2.decorations))
    return min_correspondence(drg1.metric, drg2.metric, cost, max_size)


def fit_connectivity(graph: FunctionGraph, eps: float = 0.0, rho: np.ndarray | None = None) -> ConnectivityConstants:
    """Smallest L with rho(x, y) <= L d(x, y) + 2 eps for all pairs."""
    d = graph.require_metric()
    if rho is None:
        rho = reeb_radius_matrix(graph)
    excess = rho - 2 * eps
    off = ~np.eye(graph.n, dtype=bool)
    need = off & (excess > 0)
    if not need.any():
        return ConnectivityConstants(0.0, float(eps))
    if np.any(d[need] == 0):
        return ConnectivityConstants(math.inf, float(eps))
    return ConnectivityConstants(float((excess[need] / d[need]).max()), float(eps))


def discretization_slack(graph: FunctionGraph, L: float) -> float:
    """Extra eps a graph needs for the continuous stability argument:
    lifting an edge path across a correspondence moves each step by up to
    the longest edge, which L-connectivity turns into L * longest_edge / 2."""
    d = graph.require_metric()
    if len(graph.edges) == 0:
        return 0.0
    return float(L) * float(d[graph.edges[:, 0], graph.edges[:, 1]].max()) / 2


# ---------------------------------------------------------------------------
# fused Gromov-Wasserstein

@dataclass(frozen=True, eq=False)
class FGWResult:
    value: float
    plan: np.ndarray
    converged: bool
    iterations: int


def _lse(a: np.ndarray, axis: int) -> np.ndarray:
    # scipy.special.logsumexp carries ~100us of overhead per call on tiny arrays
    m = a.max(axis=axis, keepdims=True)
    m = np.where(np.isfinite(m), m, 0.0)
    return (np.log(np.exp(a - m).sum(axis=axis, keepdims=True)) + m).squeeze(axis)


def _round_to_coupling(t: np.ndarray, p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Nearby exact coupling of (p, q): shrink overfull rows and columns,
    then spread the missing mass as a rank-one correction."""
    t = t * np.minimum(p / np.maximum(t.sum(1), 1e-300), 1.0)[:, None]
    t = t * np.minimum(q / np.maximum(t.sum(0), 1e-300), 1.0)[None, :]
    er, ec = p - t.sum(1), q - t.sum(0)
    if er.sum() > 0:
        t = t + np.outer(er, ec) / er.sum()
    return t


def _sinkhorn_log(logk: np.ndarray, log_p: np.ndarray, log_q: np.ndarray, tol: float = 1e-7,
                  max_iter: int = 100) -> np.ndarray:
    f = np.zeros(len(log_p))
    g = np.zeros(len(log_q))
    p = np.exp(log_p)
    last = math.inf
    for it in range(max_iter):
        f = log_p - _lse(logk + g[None, :], axis=1)
        g = log_q - _lse(logk + f[:, None], axis=0)
        if it % 10 == 0:
            rows = np.exp(_lse(logk + f[:, None] + g[None, :], axis=1))
            err = np.abs(rows - p).sum()
            # near-permutation kernels stall at a tiny residual
            if err < tol or (err < 1e-6 and err > 0.99 * last):
                break
            last = err
    return logk + f[:, None] + g[None, :]


def _features(drg: DecoratedReebGraph) -> np.ndarray:
    feats = []
    for d in drg.decorations:
        if not isinstance(d, PersistenceImage):
            raise SchemaError("fgw needs persistence-image decorations on every class")
        feats.append(d.vector())
    if len({f.shape for f in feats}) > 1:
        raise SchemaError("persistence images differ in resolution")
    return np.array(feats)


def _exact_ot(cost: np.ndarray) -> np.ndarray:
    """Optimal coupling of uniform measures for a linear cost. Replicating
    rows and columns up to lcm(n1, n2) turns it into an assignment problem."""
    n1, n2 = cost.shape
    size = math.lcm(n1, n2)
    r, c = np.arange(size) // (size // n1), np.arange(size) // (size // n2)
    _, col = linear_sum_assignment(cost[np.ix_(r, c)])
    plan = np.zeros((n1, n2))
    np.add.at(plan, (r, c[col]), 1.0 / size)
    return plan


def _polish(c1, c2, m, alpha, t, objective, max_iter: int = 50, tol: float = 1e-12):
    """Frank-Wolfe steps with exact line search from ``t``. Removes the small
    bias left by truncated Sinkhorn projections near a vertex of the polytope."""
    for _ in range(max_iter):
        grad = (1 - alpha) * m - 4 * alpha * c1 @ t @ c2.T
        d = _exact_ot(grad) - t
        slope = float((grad * d).sum())
        if slope > -tol:
            break
        curve = -2 * alpha * float((c1 @ d @ c2.T * d).sum())
        step = 1.0 if curve <= 0 else min(1.0, -slope / (2 * curve))
        if curve <= 0 and curve + slope >= 0:
            break
        t = t + step * d
    return objective(t)[0], t


def fgw_solve(c1: np.ndarray, c2: np.ndarray, m: np.ndarray | None, alpha: float = 0.5, ot_eps: float = 1e-2,
              tol: float = 1e-7, max_outer: int = 500, init: np.ndarray | None = None) -> FGWResult:
    """Minimize (1 - alpha) <M, T> + alpha * sum (C1_ik - C2_jl)^2 T_ij T_kl
    over couplings of uniform measures.

    Each outer step is a KL-proximal (entropic mirror) step: the next plan is
    the Sinkhorn projection of T * exp(-grad / ot_eps), run for at most a
    hundred sweeps and rounded onto the exact coupling polytope. The returned
    value is the unregularized objective of the best plan seen. The start is
    the product coupling unless ``init`` gives another positive coupling.
    """
    if not 0 <= alpha <= 1:
        raise SchemaError("alpha must lie in [0, 1]")
    n1, n2 = len(c1), len(c2)
    p = np.full(n1, 1.0 / n1)
    q = np.full(n2, 1.0 / n2)
    if m is None:
        m = np.zeros((n1, n2))
        if alpha < 1:
            raise SchemaError("feature costs needed when alpha < 1")
    const = np.outer(c1 ** 2 @ p, np.ones(n2)) + np.outer(np.ones(n1), c2 ** 2 @ q)

    def objective(t):
        tens = const - 2 * c1 @ t @ c2.T
        return (1 - alpha) * float((m * t).sum()) + alpha * float((tens * t).sum()), tens

    log_p, log_q = np.log(p), np.log(q)
    log_t = log_p[:, None] + log_q[None, :] if init is None else np.log(init)
    t = np.exp(log_t)
    val, tens = objective(t)
    best_val, best_t = val, t
    converged = False
    it = 0
    for it in range(1, max_outer + 1):
        grad = (1 - alpha) * m + 2 * alpha * tens
        log_t = _sinkhorn_log(log_t - grad / ot_eps, log_p, log_q)
        t = _round_to_coupling(np.exp(log_t), p, q)
        new_val, tens = objective(t)
        if new_val < best_val:
            best_val, best_t = new_val, t
        if abs(new_val - val) < tol:
            converged = True
            val = new_val
            break
        val = new_val
    polished, t = _polish(c1, c2, m, alpha, best_t, objective)
    if polished < best_val:
        best_val, best_t = polished, t
    return FGWResult(max(best_val, 0.0), best_t, converged, it)


def random_coupling(n1: int, n2: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform-marginal coupling from a random positive kernel."""
    logk = rng.uniform(-1.0, 1.0, (n1, n2))
    return _round_to_coupling(np.exp(_sinkhorn_log(logk, np.full(n1, -np.log(n1)), np.full(n2, -np.log(n2)),
                                                   max_iter=1000)), np.full(n1, 1.0 / n1), np.full(n2, 1.0 / n2))


def _solve_with_restarts(c1, c2, m, alpha, ot_eps, restarts, seed) -> FGWResult:
    """Product-coupling start plus ``restarts`` seeded random starts; the
    lowest objective wins. Random starts break the symmetric saddle that
    mirror-symmetric graphs put at the product coupling."""
    best = fgw_solve(c1, c2, m, alpha, ot_eps)
    rng = np.random.default_rng(seed)
    for _ in range(restarts):
        res = fgw_solve(c1, c2, m, alpha, ot_eps, init=random_coupling(len(c1), len(c2), rng))
        if res.value < best.value:
            best = res
    return best


def fgw(drg1: DecoratedReebGraph, drg2: DecoratedReebGraph, alpha: float = 0.5, ot_eps: float = 1e-2,
        strict: bool = False, restarts: int = 0, seed: int = 0) -> float:
    """FGW distance between image-decorated Reeb graphs: feature cost is the
    L2 distance between images, structure cost the squared quotient-metric
    discrepancy. Non-convergence warns (or raises with ``strict``) and the best
    value found is returned."""
    m = cdist(_features(drg1), _features(drg2)) if alpha < 1 else None
    res = _solve_with_restarts(drg1.metric, drg2.metric, m, alpha, ot_eps, restarts, seed)
    if not res.converged:
        msg = f"FGW did not converge in {res.iterations} outer iterations"
        if strict:
            raise NonConvergence(msg)
        warnings.warn(msg, RuntimeWarning, stacklevel=2)
    return res.value


def gw(drg1: DecoratedReebGraph, drg2: DecoratedReebGraph, ot_eps: float = 1e-2, restarts: int = 0,
       seed: int = 0) -> float:
    """Plain GW between quotient metrics, ignoring decorations."""
    return _solve_with_restarts(drg1.metric, drg2.metric, None, 1.0, ot_eps, restarts, seed).value


def distance_matrix(items: Sequence, dist: Callable) -> np.ndarray:
    n = len(items)
    out = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            out[i, j] = out[j, i] = dist(items[i], items[j])
    return out


def mds_embed(dist, dims: int = 2) -> np.ndarray:
    """Classical MDS. Each axis is flipped so its first nonzero coordinate is positive."""
    d = np.asarray(dist, dtype=float)
    n = len(d)
    j = np.eye(n) - 1.0 / n
    b = -0.5 * j @ (d ** 2) @ j
    b = (b + b.T) / 2
    w, v = np.linalg.eigh(b)
    order = np.argsort(-w, kind="stable")[:dims]
    w, v = np.clip(w[order], 0, None), v[:, order]
    x = v * np.sqrt(w)
    x[np.abs(x) < 1e-12 * max(1.0, float(np.abs(d).max()) if n else 1.0)] = 0.0
    for c in range(x.shape[1]):
        nz = np.flatnonzero(x[:, c])
        if len(nz) and x[nz[0], c] < 0:
            x[:, c] = -x[:, c]
    if x.shape[1] < dims:
        x = np.hstack([x, np.zeros((n, dims - x.shape[1]))])
    return x


def class_separation(dist: np.ndarray, labels: Sequence) -> float:
    """Mean inter-class distance over mean intra-class distance."""
    labels = np.asarray(labels)
    same = labels[:, None] == labels[None, :]
    off = ~np.eye(len(labels), dtype=bool)
    return float(dist[~same].mean() / dist[same & off].mean())
