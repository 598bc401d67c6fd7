"""Decorated Reeb graphs: Reeb radius, smoothed quotients, barcode decorations
and comparisons."""
from .core import (Barcode, CapacityError, DecoratedReebGraph, DisconnectedError, FunctionGraph,
                   InfiniteDistance, Interval, NonConvergence, NonSimpleError, PersistenceImage,
                   ReebDecoError, SchemaError, SizeError, load_drg, load_function_graph, save_drg,
                   save_function_graph)
from .graph_build import eccentricity_field, height_field, knn_graph, pagerank_field, radius_graph
from .reeb_radius import reeb_radius_from, reeb_radius_matrix
from .reeb_quotient import QuotientSpec, smooth_quotient
from .persistence import SliceSchedule, bottleneck, constrained_vr_filtration, reduce_and_extract, vr_filtration
from .decorate import ImageSpec, decorate_all, persistence_image, vectorize_drg
from .compare import brute_gh, fgw, fit_connectivity, mds_embed

__version__ = "0.1.0"
