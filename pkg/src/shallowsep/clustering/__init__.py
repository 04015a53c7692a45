"""Clusterings, dense distance graphs, spanners and the clustering-based separator."""

from .clusters import (Budgets, Cluster, Clustering, RegimeError, build_nested,
                       build_r_clustering, dump_clustering, load_clustering)
from .ddg import DenseDistanceGraph, dense_distance_graph, restrict_ddg
from .dynamic import ActiveSet, DynamicDecomposition, IllegalTransition
from .spanner import Spanner, build_spanner

__all__ = [
    "ActiveSet", "Budgets", "Cluster", "Clustering", "DenseDistanceGraph",
    "DynamicDecomposition", "IllegalTransition", "RegimeError", "Spanner",
    "build_nested", "build_r_clustering", "build_spanner", "dense_distance_graph",
    "dump_clustering", "load_clustering", "restrict_ddg",
]
