"""Balanced separators or shallow clique-minor certificates for vertex-weighted graphs."""

from __future__ import annotations

from .algo3 import run_algorithm3
from .clustering.algo2 import run_algorithm2
from .graph import ProblemParams, WeightedGraph, components, load_graph, read_graph
from .outcome import MinorCertificate, Rejected, RunStats, Separator, TreeRecord
from .separator import run_algorithm1
from .verify import verify_minor_certificate, verify_outcome, verify_separator

__all__ = [
    "MinorCertificate", "ProblemParams", "Rejected", "RunStats", "Separator", "TreeRecord",
    "WeightedGraph", "components", "load_graph", "read_graph", "run_algorithm1",
    "run_algorithm2", "run_algorithm3", "verify_minor_certificate", "verify_outcome",
    "verify_separator",
]
