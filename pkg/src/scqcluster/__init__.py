"""Exact recovery of (beta, gamma)-convex clusterings from same-cluster and seed queries."""

from .convexity import ConvexityParams, ConvexityVerdict, check_convex, check_convex_generalized, min_radius
from .graphcore import SemimetricGraph, ThresholdGraph, mst, threshold
from .instances import Instance, generate
from .metrics import density_constant, packing_number, pstar
from .oracles import Clustering, OracleSession
from .radii import get_epsilons
from .recovery import query_budget, recover_clustering, recover_clustering2

__version__ = "0.1.0"

__all__ = [
    "Clustering",
    "ConvexityParams",
    "ConvexityVerdict",
    "Instance",
    "OracleSession",
    "SemimetricGraph",
    "ThresholdGraph",
    "check_convex",
    "check_convex_generalized",
    "density_constant",
    "generate",
    "get_epsilons",
    "min_radius",
    "mst",
    "packing_number",
    "pstar",
    "query_budget",
    "recover_clustering",
    "recover_clustering2",
    "threshold",
]
