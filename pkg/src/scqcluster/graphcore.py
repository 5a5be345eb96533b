"""Weighted semimetric graphs, threshold graphs and the traversals built on them.

Weights are exact :class:`fractions.Fraction` values.  A missing edge stands
for an infinite distance.  Threshold graphs are unweighted and keep a
reference to the weighted graph they came from, because some routines (the
margin-based separator in particular) need to re-threshold at a smaller
radius.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from collections import deque
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import NoPath

INF = math.inf


def as_fraction(value) -> Fraction:
    """Parse ``value`` exactly: ints, Fractions, ``"p/q"`` or decimal strings."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not weights")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    if isinstance(value, float):
        # floats only enter through user code; keep the exact binary value
        return Fraction(value)
    raise TypeError(f"cannot interpret {value!r} as a rational")


def format_fraction(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


class SemimetricGraph:
    """Undirected graph on nodes ``0..n-1`` with positive rational weights."""

    __slots__ = ("n", "edges", "_adj", "_weight", "_levels", "_rank", "_hash", "__weakref__")

    def __init__(self, n: int, edges: Iterable[tuple[int, int, object]]):
        if n < 0:
            raise ValueError("node count must be non-negative")
        self.n = n
        weight: dict[tuple[int, int], Fraction] = {}
        for u, v, w in edges:
            u, v, w = int(u), int(v), as_fraction(w)
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u}, {v}) out of range for n={n}")
            if u == v:
                raise ValueError(f"self-loop at {u}")
            if w <= 0:
                raise ValueError(f"non-positive weight on ({u}, {v})")
            key = (u, v) if u < v else (v, u)
            if key in weight:
                raise ValueError(f"duplicate edge {key}")
            weight[key] = w
        self._weight = weight
        self.edges = tuple(sorted((u, v, w) for (u, v), w in weight.items()))
        adj: list[list[tuple[int, Fraction]]] = [[] for _ in range(n)]
        for u, v, w in self.edges:
            adj[u].append((v, w))
            adj[v].append((u, w))
        for row in adj:
            row.sort()
        self._adj = tuple(tuple(row) for row in adj)
        self._levels = tuple(sorted(set(weight.values())))
        level_index = {w: i for i, w in enumerate(self._levels)}
        self._rank = {key: level_index[w] for key, w in weight.items()}
        self._hash = hash((n, self.edges))

    def __repr__(self):
        return f"SemimetricGraph(n={self.n}, m={len(self.edges)})"

    def __eq__(self, other):
        return isinstance(other, SemimetricGraph) and self.n == other.n and self.edges == other.edges

    def __hash__(self):
        return self._hash

    @property
    def m(self) -> int:
        return len(self.edges)

    def weight(self, u: int, v: int) -> Fraction | None:
        """d(u, v), or ``None`` when the pair has no edge (infinite distance)."""
        if u == v:
            return Fraction(0)
        return self._weight.get((u, v) if u < v else (v, u))

    def neighbors(self, u: int) -> tuple[tuple[int, Fraction], ...]:
        return self._adj[u]

    def distinct_weights(self) -> tuple[Fraction, ...]:
        return self._levels

    def level(self, eps) -> int:
        """Number of distinct weights that are <= eps."""
        return bisect_right(self._levels, as_fraction(eps))

    def edge_rank(self, u: int, v: int) -> int:
        return self._rank[(u, v) if u < v else (v, u)]

    def scaled(self, factor) -> "SemimetricGraph":
        factor = as_fraction(factor)
        return SemimetricGraph(self.n, ((u, v, w * factor) for u, v, w in self.edges))


class ThresholdGraph:
    """Unweighted graph keeping the edges of ``source`` with weight <= eps.

    ``nodes`` is the vertex set; adjacency rows of nodes outside it are empty.
    Neighbour rows are sorted by node id, which fixes BFS tie-breaking.
    """

    __slots__ = ("n", "nodes", "adj", "source", "eps")

    def __init__(self, n, nodes, adj, source=None, eps=None):
        self.n = n
        self.nodes = frozenset(nodes)
        self.adj = adj
        self.source = source
        self.eps = eps

    def __repr__(self):
        return f"ThresholdGraph(n={self.n}, |V|={len(self.nodes)}, m={self.edge_count()}, eps={self.eps})"

    def neighbors(self, v: int) -> tuple[int, ...]:
        return self.adj[v]

    def edges(self):
        for u in sorted(self.nodes):
            for v in self.adj[u]:
                if u < v:
                    yield (u, v)

    def edge_count(self) -> int:
        return sum(len(self.adj[u]) for u in self.nodes) // 2

    def has_edge(self, u: int, v: int) -> bool:
        row = self.adj[u]
        i = bisect_right(row, v)
        return i > 0 and row[i - 1] == v

    def induced(self, nodes: Iterable[int]) -> "ThresholdGraph":
        keep = frozenset(nodes) & self.nodes
        adj = [()] * self.n
        for u in keep:
            adj[u] = tuple(v for v in self.adj[u] if v in keep)
        return ThresholdGraph(self.n, keep, tuple(adj), self.source, self.eps)


def threshold(g: SemimetricGraph, eps, nodes: Iterable[int] | None = None) -> ThresholdGraph:
    """G_X(eps): keep edges with d(u, v) <= eps, optionally on a vertex subset.

    One pass over the edges.  ``eps`` below the smallest weight (including 0)
    gives an edgeless graph.
    """
    eps = as_fraction(eps)
    if eps < 0:
        raise ValueError("threshold radius must be non-negative")
    keep = frozenset(range(g.n)) if nodes is None else frozenset(nodes)
    cut = g.level(eps)
    rows: list[list[int]] = [[] for _ in range(g.n)]
    rank = g._rank
    for u, v, _ in g.edges:
        if rank[(u, v)] < cut and u in keep and v in keep:
            rows[u].append(v)
            rows[v].append(u)
    for row in rows:
        row.sort()
    return ThresholdGraph(g.n, keep, tuple(tuple(r) for r in rows), g, eps)


def bfs_distances(g: ThresholdGraph, source: int) -> list:
    """Hop distances from ``source``; ``INF`` for unreachable nodes."""
    if not 0 <= source < g.n:
        raise ValueError(f"source {source} out of range")
    dist = [INF] * g.n
    if source not in g.nodes:
        return dist
    dist[source] = 0
    queue = deque([source])
    adj = g.adj
    while queue:
        u = queue.popleft()
        du = dist[u] + 1
        for v in adj[u]:
            if dist[v] == INF:
                dist[v] = du
                queue.append(v)
    return dist


def shortest_path(g: ThresholdGraph, s: int, t: int) -> list[int]:
    """A shortest s-t path; neighbours are scanned in ascending id order and
    each node keeps the first node that discovered it as parent."""
    if s not in g.nodes or t not in g.nodes:
        raise NoPath(f"{s} or {t} is not a vertex")
    if s == t:
        return [s]
    parent = {s: None}
    queue = deque([s])
    adj = g.adj
    while queue:
        u = queue.popleft()
        for v in adj[u]:
            if v not in parent:
                parent[v] = u
                if v == t:
                    path = [t]
                    while parent[path[-1]] is not None:
                        path.append(parent[path[-1]])
                    path.reverse()
                    return path
                queue.append(v)
    raise NoPath(f"{t} is unreachable from {s}")


def connected_component(g: ThresholdGraph, v: int) -> frozenset[int]:
    if v not in g.nodes:
        raise ValueError(f"{v} is not a vertex")
    seen = {v}
    stack = [v]
    adj = g.adj
    while stack:
        u = stack.pop()
        for w in adj[u]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return frozenset(seen)


def components(g: ThresholdGraph) -> list[frozenset[int]]:
    """All connected components, ordered by their smallest node id."""
    out = []
    seen: set[int] = set()
    for v in sorted(g.nodes):
        if v not in seen:
            comp = connected_component(g, v)
            seen |= comp
            out.append(comp)
    return out


def cut_edges(g: ThresholdGraph, u_set: Iterable[int]) -> set[tuple[int, int]]:
    """Gamma(U): edges of ``g`` with exactly one endpoint in ``u_set``."""
    inside = frozenset(u_set)
    out = set()
    for u in inside:
        if u not in g.nodes:
            continue
        for v in g.adj[u]:
            if v not in inside:
                out.add((u, v) if u < v else (v, u))
    return out


class UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))
        self.size = [1] * n

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        return True


class SpanningForest:
    __slots__ = ("n", "edges")

    def __init__(self, n: int, edges: Sequence[tuple[int, int, Fraction]]):
        self.n = n
        self.edges = tuple(edges)

    def __repr__(self):
        return f"SpanningForest(n={self.n}, edges={len(self.edges)})"

    def weight(self) -> Fraction:
        return sum((w for _, _, w in self.edges), Fraction(0))

    def distinct_weights(self) -> list[Fraction]:
        return sorted({w for _, _, w in self.edges})

    def as_graph(self) -> SemimetricGraph:
        return SemimetricGraph(self.n, self.edges)


def mst(g: SemimetricGraph) -> SpanningForest:
    """Kruskal's algorithm; ties broken by ascending (w, u, v)."""
    uf = UnionFind(g.n)
    chosen = []
    for u, v, w in sorted(g.edges, key=lambda e: (e[2], e[0], e[1])):
        if uf.union(u, v):
            chosen.append((u, v, w))
            if len(chosen) == g.n - 1:
                break
    return SpanningForest(g.n, chosen)


def partition_of(g: ThresholdGraph) -> frozenset[frozenset[int]]:
    return frozenset(components(g))
