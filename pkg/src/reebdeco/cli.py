"""Command-line interface: one subcommand per stage plus ``pipeline``.

Exit codes: 0 ok, 1 other library error, 2 schema, 3 disconnected,
4 capacity, 5 nonconvergence. ``reebdeco exit-codes`` prints the table as JSON.
REEBDECO_THREADS caps the worker threads of distance-matrix jobs (default 1).
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import compare
from .core import (Barcode, FunctionGraph, ReebDecoError, SchemaError, barcode_from_list, barcode_to_list,
                   graph_to_dict, load_drg, load_function_graph, load_point_cloud_csv, save_drg)
from .decorate import ImageSpec, decorate_all, image_spec_for, vectorize_drg
from .graph_build import eccentricity_field, euclidean_metric, height_field, pagerank_field
from .persistence import DEFAULT_CAPACITY, SliceSchedule, bottleneck_matrix, reduce_and_extract, vr_filtration
from .pipeline import PipelineConfig, build_graph, run_pipeline
from .reeb_quotient import QuotientSpec, round_values, smooth_quotient
from .reeb_radius import reeb_radius_from, reeb_radius_matrix
from .render import render_svg
from .synthetic import SHAPES, generate_synthetic

EXIT_CODES = {"ok": 0, "error": 1, "schema": 2, "disconnected": 3, "capacity": 4, "nonconvergence": 5}


def threads() -> int:
    try:
        return max(1, int(os.environ.get("REEBDECO_THREADS", "1")))
    except ValueError:
        return 1


def _fmt(x: float) -> str:
    return repr(float(x))


def write_matrix(path, mat) -> None:
    mat = np.atleast_2d(np.asarray(mat, dtype=float))
    Path(path).write_text("".join(",".join(_fmt(x) for x in row) + "\n" for row in mat))


def read_matrix(path) -> np.ndarray:
    return load_point_cloud_csv(path)


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def load_graph(path) -> FunctionGraph:
    """Graph JSON; a graph with positions but no metric gets the Euclidean one."""
    g = load_function_graph(Path(path).read_text())
    if g.node_metric is None and g.positions is not None:
        g = FunctionGraph(g.n, g.edges, g.values, euclidean_metric(g.positions), g.positions, True)
    return g


def dump_graph(g: FunctionGraph, with_metric: bool = False) -> str:
    d = graph_to_dict(g)
    if not with_metric and g.positions is not None:
        d.pop("metric", None)
    return json.dumps(d)


def _pairwise(items, dist) -> np.ndarray:
    n = len(items)
    jobs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    out = np.zeros((n, n))
    with ThreadPoolExecutor(threads()) as pool:
        vals = list(pool.map(lambda ij: dist(items[ij[0]], items[ij[1]]), jobs))
    for (i, j), v in zip(jobs, vals):
        out[i, j] = out[j, i] = v
    return out


# ---------------------------------------------------------------------------
# subcommands

def cmd_graph_build(a):
    pts = load_point_cloud_csv(a.input)
    _emit(dump_graph(build_graph(pts, a.knn, a.radius), a.with_metric), a.out)


def cmd_field(a):
    g = load_graph(a.graph)
    if a.kind == "height":
        if g.positions is None:
            raise SchemaError("height field needs node positions")
        vals = height_field(g.positions, a.axis)
    elif a.kind == "ecc":
        vals = eccentricity_field(g, a.p)
    else:
        vals = pagerank_field(g, a.damping)
    _emit(dump_graph(g.with_values(vals)), a.out)


def cmd_radius(a):
    g = load_graph(a.graph)
    if a.matrix:
        write_matrix(a.matrix, reeb_radius_matrix(g))
    else:
        sys.stdout.write(",".join(_fmt(x) for x in reeb_radius_from(g, a.source).rho) + "\n")


def cmd_quotient(a):
    g = load_graph(a.graph)
    _emit(save_drg(smooth_quotient(g, QuotientSpec(a.epsilon, a.round))), a.out)


def cmd_persistence(a):
    d = euclidean_metric(load_point_cloud_csv(a.cloud))
    b = reduce_and_extract(vr_filtration(d, a.rmax, a.dim + 1, a.capacity), a.dim)
    _emit(json.dumps(barcode_to_list(b)) + "\n", a.out)


def _parse_res(s: str) -> tuple[int, int]:
    try:
        r, c = s.lower().split("x")
        return int(r), int(c)
    except ValueError:
        raise argparse.ArgumentTypeError(f"resolution must look like 25x25, got {s!r}") from None


def cmd_decorate(a):
    g = load_graph(a.graph)
    drg = load_drg(Path(a.drg).read_text())
    step = drg.params.get("round_step")
    if step is not None:
        g = round_values(g, step)
    drg = decorate_all(g, drg, SliceSchedule(a.lam, a.c), a.dim, a.rmax, landmarks=a.landmarks,
                       capacity=a.capacity)
    if a.image:
        drg = vectorize_drg(drg, ImageSpec(a.image, a.sigma))
    _emit(save_drg(drg), a.out)


def _drg_files(folder) -> list[Path]:
    files = sorted(Path(folder).glob("*.json"))
    if not files:
        raise SchemaError(f"no .json files in {folder}")
    return files


def cmd_compare_fgw(a):
    files = _drg_files(a.drgs)
    drgs = [load_drg(f.read_text()) for f in files]
    if a.alpha < 1 and not all(d.decorations and all(x is not None and not isinstance(x, Barcode)
                                                      for x in d.decorations) for d in drgs):
        # barcode decorations are vectorized on one grid shared by all inputs
        spec = _shared_image_spec(drgs, a.image)
        drgs = [vectorize_drg(d, spec) for d in drgs]
    mat = _pairwise(drgs, lambda x, y: compare.fgw(x, y, a.alpha, a.ot_eps, strict=a.strict,
                                                          restarts=a.restarts, seed=a.seed))
    write_matrix(a.out, mat)
    print("\n".join(f.name for f in files))


def _shared_image_spec(drgs, resolution) -> ImageSpec:
    bars = [x for d in drgs for x in d.decorations if isinstance(x, Barcode)]
    return image_spec_for(bars, resolution)


def cmd_compare_bottleneck(a):
    files = [Path(p) for p in a.barcodes]
    bars = []
    for f in files:
        items = json.loads(f.read_text())
        r_max = max((it["death"]["open_at"] for it in items if isinstance(it["death"], dict)), default=None)
        bars.append(barcode_from_list(items, r_max))
    mat = bottleneck_matrix(bars)
    if a.out:
        write_matrix(a.out, mat)
    else:
        sys.stdout.write("".join(",".join(_fmt(x) for x in row) + "\n" for row in mat))


def cmd_embed(a):
    write_matrix(a.out, compare.mds_embed(read_matrix(a.dist), a.dims))


def cmd_generate(a):
    res = generate_synthetic(a.shape, a.n, a.noise, a.seed, a.per_class)
    if isinstance(res, list):
        out = Path(a.out)
        out.mkdir(parents=True, exist_ok=True)
        for i, pc in enumerate(res):
            write_matrix(out / f"{i:03d}_{pc.name}.csv", pc.points)
    else:
        write_matrix(a.out, res.points)


def cmd_render(a):
    if a.graph:
        obj = load_graph(a.graph)
    elif a.drg:
        obj = load_drg(Path(a.drg).read_text())
    elif a.barcode:
        items = json.loads(Path(a.barcode).read_text())
        r_max = max((it["death"]["open_at"] for it in items if isinstance(it["death"], dict)), default=None)
        obj = barcode_from_list(items, r_max)
    else:
        obj = read_matrix(a.dist)
    _emit(render_svg(obj), a.out)


def cmd_pipeline(a):
    cfg = PipelineConfig()
    if a.config:
        cfg = PipelineConfig(**json.loads(Path(a.config).read_text()))
    for key in ("input", "shape", "n", "noise", "knn", "radius", "field", "round_step", "epsilon", "lam", "c",
                "k", "r_max", "landmarks", "image", "sigma", "out_dir", "seed"):
        val = getattr(a, key)
        if val is not None:
            setattr(cfg, key, val)
    if a.radius is not None:
        cfg.knn = None
    res = run_pipeline(cfg)
    print(json.dumps({"classes": res.report["classes"], "bar_counts": res.report["bar_counts"],
                      "timings": res.timings}))


def cmd_exit_codes(a):
    print(json.dumps(EXIT_CODES, indent=2))


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="reebdeco", description=__doc__,
                                formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("graph", help="graph construction").add_subparsers(dest="action", required=True)
    gb = g.add_parser("build", help="kNN or radius graph from a point-cloud CSV")
    gb.add_argument("--input", required=True)
    grp = gb.add_mutually_exclusive_group(required=True)
    grp.add_argument("--knn", type=int)
    grp.add_argument("--radius", type=float)
    gb.add_argument("--with-metric", action="store_true", help="store the full distance matrix")
    gb.add_argument("--out")
    gb.set_defaults(func=cmd_graph_build)

    f = sub.add_parser("field", help="attach a scalar field to a graph").add_subparsers(dest="kind", required=True)
    fh = f.add_parser("height", help="coordinate of the node positions")
    fh.add_argument("--axis", type=int, default=2)
    fe = f.add_parser("ecc", help="p-eccentricity")
    fe.add_argument("--p", type=float, default=2.0)
    fp = f.add_parser("pagerank", help="PageRank")
    fp.add_argument("--damping", type=float, default=0.85)
    for sp in (fh, fe, fp):
        sp.add_argument("--graph", required=True)
        sp.add_argument("--out")
        sp.set_defaults(func=cmd_field)

    r = sub.add_parser("radius", help="Reeb radius from a source, or the full matrix")
    r.add_argument("--graph", required=True)
    grp = r.add_mutually_exclusive_group(required=True)
    grp.add_argument("--source", type=int)
    grp.add_argument("--matrix", help="CSV path for the full matrix")
    r.set_defaults(func=cmd_radius)

    q = sub.add_parser("quotient", help="epsilon-smoothed Reeb graph")
    q.add_argument("--graph", required=True)
    q.add_argument("--epsilon", type=float, default=0.0)
    q.add_argument("--round", type=float, help="round values to multiples of this step first")
    q.add_argument("--out")
    q.set_defaults(func=cmd_quotient)

    ph = sub.add_parser("persistence", help="VR barcode of a point cloud")
    ph.add_argument("--cloud", required=True)
    ph.add_argument("--dim", type=int, default=1)
    ph.add_argument("--rmax", type=float)
    ph.add_argument("--capacity", type=int, default=DEFAULT_CAPACITY)
    ph.add_argument("--out")
    ph.set_defaults(func=cmd_persistence)

    d = sub.add_parser("decorate", help="barcode (or image) decorations for every class")
    d.add_argument("--graph", required=True)
    d.add_argument("--drg", required=True)
    d.add_argument("--lambda", dest="lam", type=float, default=1.0)
    d.add_argument("--c", type=float, default=0.0)
    d.add_argument("--dim", type=int, default=1)
    d.add_argument("--rmax", type=float)
    d.add_argument("--landmarks", type=int)
    d.add_argument("--capacity", type=int, default=DEFAULT_CAPACITY)
    d.add_argument("--image", type=_parse_res)
    d.add_argument("--sigma", type=float)
    d.add_argument("--out")
    d.set_defaults(func=cmd_decorate)

    c = sub.add_parser("compare", help="distance matrices").add_subparsers(dest="kind", required=True)
    cf = c.add_parser("fgw", help="FGW between all DRG files of a folder")
    cf.add_argument("--drgs", required=True)
    cf.add_argument("--alpha", type=float, default=0.5)
    cf.add_argument("--ot-eps", type=float, default=1e-2)
    cf.add_argument("--image", type=_parse_res, default=(25, 25))
    cf.add_argument("--strict", action="store_true", help="fail on non-convergence")
    cf.add_argument("--restarts", type=int, default=0, help="extra seeded random starts per pair")
    cf.add_argument("--seed", type=int, default=0)
    cf.add_argument("--out", required=True)
    cf.set_defaults(func=cmd_compare_fgw)
    cb = c.add_parser("bottleneck", help="bottleneck distances between barcode files")
    cb.add_argument("--barcodes", nargs="+", required=True)
    cb.add_argument("--out")
    cb.set_defaults(func=cmd_compare_bottleneck)

    e = sub.add_parser("embed", help="classical MDS of a distance matrix")
    e.add_argument("--dist", required=True)
    e.add_argument("--dims", type=int, default=2)
    e.add_argument("--out", required=True)
    e.set_defaults(func=cmd_embed)

    gen = sub.add_parser("generate", help="synthetic point clouds")
    gen.add_argument("--shape", choices=SHAPES, required=True)
    gen.add_argument("--n", type=int, default=1000)
    gen.add_argument("--noise", type=float, default=0.0)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--per-class", type=int, default=10)
    gen.add_argument("--out", required=True, help="CSV path (folder for four_class_set)")
    gen.set_defaults(func=cmd_generate)

    rd = sub.add_parser("render", help="SVG of a graph, DRG, barcode or distance matrix")
    grp = rd.add_mutually_exclusive_group(required=True)
    grp.add_argument("--graph")
    grp.add_argument("--drg")
    grp.add_argument("--barcode")
    grp.add_argument("--dist")
    rd.add_argument("--out")
    rd.set_defaults(func=cmd_render)

    pl = sub.add_parser("pipeline", help="end-to-end run")
    pl.add_argument("--config", help="JSON file of PipelineConfig fields")
    pl.add_argument("--input")
    pl.add_argument("--shape", choices=[s for s in SHAPES if s != "four_class_set"])
    pl.add_argument("--n", type=int)
    pl.add_argument("--noise", type=float)
    pl.add_argument("--knn", type=int)
    pl.add_argument("--radius", type=float)
    pl.add_argument("--field", help="height:<axis> | ecc:<p> | pagerank:<damping>")
    pl.add_argument("--round", dest="round_step", type=float)
    pl.add_argument("--epsilon", type=float)
    pl.add_argument("--lambda", dest="lam", type=float)
    pl.add_argument("--c", type=float)
    pl.add_argument("--k", type=int)
    pl.add_argument("--rmax", dest="r_max", type=float)
    pl.add_argument("--landmarks", type=int)
    pl.add_argument("--image", type=_parse_res)
    pl.add_argument("--sigma", type=float)
    pl.add_argument("--out-dir")
    pl.add_argument("--seed", type=int)
    pl.set_defaults(func=cmd_pipeline)

    ec = sub.add_parser("exit-codes", help="print the exit code table as JSON")
    ec.set_defaults(func=cmd_exit_codes)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except ReebDecoError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code
    except json.JSONDecodeError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CODES["schema"]
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CODES["error"]
    return 0


if __name__ == "__main__":
    sys.exit(main())
