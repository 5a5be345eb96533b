"""Learning the cluster radii with seed queries over a minimum spanning tree."""

from __future__ import annotations

from contextlib import nullcontext
from dataclasses import dataclass
from fractions import Fraction

from .errors import EmptyCluster
from .graphcore import SemimetricGraph, SpanningForest, ThresholdGraph, connected_component, mst, threshold


@dataclass
class RadiiReport:
    radii: tuple[Fraction, ...]
    seed_used: int
    mst_edge_count: int
    levels: int

    def to_dict(self) -> dict:
        return {
            "radii": [str(r) for r in self.radii],
            "seed": self.seed_used,
            "mst_edges": self.mst_edge_count,
            "levels": self.levels,
        }


def is_connected(g: ThresholdGraph, i: int, oracle) -> bool:
    """True iff all of C_i ∩ V(g) sits in one component of g; two SEED queries."""
    u = oracle.seed(g.nodes, i)
    if u is None:
        raise EmptyCluster(f"cluster {i} has no node in the graph")
    comp = connected_component(g, u)
    return oracle.seed(g.nodes - comp, i) is None


def _levels(t: SpanningForest) -> list[Fraction]:
    return [Fraction(0)] + t.distinct_weights()


def get_epsilon(t: SpanningForest, i: int, oracle) -> Fraction:
    """Smallest MST weight at which C_i becomes connected (binary search).

    The list starts with w_0 = 0.  A singleton cluster is connected already at
    w_0; since a zero radius is meaningless it is mapped to the smallest
    positive weight (the MST always contains a globally lightest edge), which
    is the convention used by the convexity checker.
    """
    w = _levels(t)
    tree_graph = t.as_graph()
    lo, hi = 0, len(w) - 1
    while w[lo] < w[hi]:
        mid = (lo + hi) // 2
        if is_connected(threshold(tree_graph, w[mid]), i, oracle):
            hi = mid
        else:
            lo = mid + 1
    if w[hi] == 0:
        return w[1] if len(w) > 1 else Fraction(0)
    return w[hi]


def get_epsilons(g: SemimetricGraph, k: int, oracle) -> RadiiReport:
    """One MST, then one binary search per cluster."""
    before = getattr(oracle, "seed_count", 0)
    t = mst(g)
    enter = getattr(oracle, "phase", None)
    radii = []
    with (enter("radii") if enter is not None else nullcontext()):
        for i in range(k):
            radii.append(get_epsilon(t, i, oracle))
    used = getattr(oracle, "seed_count", 0) - before
    return RadiiReport(tuple(radii), used, len(t.edges), len(t.distinct_weights()))
