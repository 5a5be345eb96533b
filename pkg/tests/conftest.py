"""Shared brute-force reference implementations and small graph builders.

The references here are deliberately naive (networkx traversals, subset
enumeration, simple-path enumeration) so that they can serve as independent
oracles for the production code.
"""

import itertools
import random
from fractions import Fraction

import networkx as nx
import pytest

from scqcluster.graphcore import SemimetricGraph
from scqcluster.oracles import Clustering


def random_graph(rng: random.Random, n: int, p: float = 0.3, weights=(1, 2, 3, 4, 5)) -> SemimetricGraph:
    edges = []
    for u in range(n):
        for v in range(u + 1, n):
            if rng.random() < p:
                edges.append((u, v, Fraction(rng.choice(weights), rng.choice((1, 2)))))
    if not edges and n >= 2:
        edges.append((0, 1, Fraction(weights[0])))
    return SemimetricGraph(n, edges)


def random_partition(rng: random.Random, n: int, k: int) -> Clustering:
    labels = list(range(k)) + [rng.randrange(k) for _ in range(n - k)]
    rng.shuffle(labels)
    return Clustering(tuple(labels), k)


def to_nx(g: SemimetricGraph, eps=None, nodes=None) -> nx.Graph:
    h = nx.Graph()
    keep = range(g.n) if nodes is None else nodes
    h.add_nodes_from(keep)
    keep = set(keep)
    for u, v, w in g.edges:
        if (eps is None or w <= eps) and u in keep and v in keep:
            h.add_edge(u, v, weight=w)
    return h


def nx_partition(h: nx.Graph):
    return frozenset(frozenset(c) for c in nx.connected_components(h))


def brute_packing(g: SemimetricGraph, pts, sep) -> int:
    """Largest subset of ``pts`` with every pair at distance > sep (missing edges are infinite)."""
    pts = list(pts)
    for size in range(len(pts), 0, -1):
        for combo in itertools.combinations(pts, size):
            if all(g.weight(a, b) is None or g.weight(a, b) > sep for a, b in itertools.combinations(combo, 2)):
                return size
    return 0


def brute_ball(g: SemimetricGraph, x, r):
    return [y for y in range(g.n) if y == x or (g.weight(x, y) is not None and g.weight(x, y) <= r)]


def brute_pstar(g: SemimetricGraph, eta) -> int:
    """Max packing over every ball, scanning every r among all distinct weights."""
    best = 1
    for x in range(g.n):
        for r in g.distinct_weights():
            best = max(best, brute_packing(g, brute_ball(g, x, r), eta * r))
    return best


def brute_min_radius(g: SemimetricGraph, members) -> Fraction:
    """Smallest distinct weight at which the induced threshold subgraph is connected."""
    members = set(members)
    if len(members) == 1:
        return g.distinct_weights()[0]
    for w in g.distinct_weights():
        if nx.is_connected(to_nx(g, w, members)):
            return w
    raise AssertionError("never connected")


def brute_geodesic_ok(g: SemimetricGraph, members, eps, gamma) -> bool:
    """Every simple path of length <= (1+gamma) d between two members stays inside."""
    h = to_nx(g, eps)
    members = set(members)
    for x, y in itertools.combinations(sorted(members), 2):
        try:
            d = nx.shortest_path_length(h, x, y)
        except nx.NetworkXNoPath:
            continue
        cap = int((1 + gamma) * d)
        for path in nx.all_simple_paths(h, x, y, cutoff=cap):
            if any(p not in members for p in path):
                return False
    return True


def brute_convex(g: SemimetricGraph, clustering: Clustering, beta, gamma, eps) -> dict:
    """Which of the three properties hold, by brute force (single radius)."""
    h = to_nx(g, eps)
    out = {"connectivity": True, "metric-margin": True, "geodesic": True}
    for i, members in enumerate(clustering.clusters()):
        if len(members) > 1 and not nx.is_connected(h.subgraph(members)):
            out["connectivity"] = False
        for u, v, w in g.edges:
            if (u in members) != (v in members) and w <= beta * eps:
                out["metric-margin"] = False
        if not brute_geodesic_ok(g, members, eps, gamma):
            out["geodesic"] = False
    return out


@pytest.fixture
def rng():
    return random.Random(12345)


# -- acceptance reporting --------------------------------------------------------

ACCEPTANCE_LINES = {}


def record_criterion(number: int, ok: bool, detail: str) -> None:
    line = f"CRITERION {number:2d}: {'PASS' if ok else 'FAIL'} - {detail}"
    ACCEPTANCE_LINES[number] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for number in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[number])
