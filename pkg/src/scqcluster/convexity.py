"""Brute-force certification of (beta, gamma)-convex clusterings.

Three properties are checked per cluster: connectivity of the induced
threshold subgraph, the local metric margin, and geodesic convexity with
margin.  The geodesic property is the expensive one.  For every same-cluster
pair (x, y) at hop distance D it asks whether some simple x-y path with at
most floor((1 + gamma) * D) edges visits a foreign node.  The search is an
exact depth-first enumeration of simple paths, pruned only by valid lower
bounds:

* a vertex can lie on a simple x-y path only if it belongs to a block
  (biconnected component) on the x-y path of the block-cut tree;
* the remaining length from v is at least the hop distance from v to y, and
  at least the shortest v -> foreign -> y walk while no foreign node has been
  visited yet.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .errors import Disconnected, TooLarge
from .graphcore import (
    INF,
    SemimetricGraph,
    ThresholdGraph,
    UnionFind,
    as_fraction,
    bfs_distances,
    threshold,
)
from .oracles import Clustering

DEFAULT_BUDGET = 10**7

CONNECTIVITY = "connectivity"
MARGIN = "metric-margin"
GEODESIC = "geodesic"


@dataclass(frozen=True)
class ConvexityParams:
    beta: Fraction
    gamma: Fraction
    radii: Fraction | tuple[Fraction, ...]

    def __post_init__(self):
        beta, gamma = as_fraction(self.beta), as_fraction(self.gamma)
        if not (0 < beta <= 1 and 0 < gamma <= 1):
            raise ValueError("beta and gamma must lie in (0, 1]")
        if isinstance(self.radii, (list, tuple)):
            radii = tuple(as_fraction(r) for r in self.radii)
            if not radii:
                raise ValueError("empty radius vector")
        else:
            radii = as_fraction(self.radii)
        if any(r <= 0 for r in (radii if isinstance(radii, tuple) else (radii,))):
            raise ValueError("radii must be positive")
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "gamma", gamma)
        object.__setattr__(self, "radii", radii)

    @property
    def single(self) -> bool:
        return not isinstance(self.radii, tuple)

    @property
    def eps(self) -> Fraction:
        if not self.single:
            raise ValueError("parameters carry one radius per cluster")
        return self.radii

    def radius(self, i: int) -> Fraction:
        return self.radii if self.single else self.radii[i]

    def radius_vector(self, k: int) -> tuple[Fraction, ...]:
        if self.single:
            return (self.radii,) * k
        if len(self.radii) != k:
            raise ValueError(f"expected {k} radii, got {len(self.radii)}")
        return self.radii


@dataclass(frozen=True)
class Violation:
    cluster: int
    prop: str
    witness: tuple
    eps: Fraction

    def to_dict(self):
        return {
            "cluster": self.cluster,
            "property": self.prop,
            "witness": list(self.witness),
            "eps": str(self.eps),
        }


@dataclass
class ConvexityVerdict:
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def properties(self) -> set[str]:
        return {v.prop for v in self.violations}

    def to_dict(self):
        return {"ok": self.ok, "violations": [v.to_dict() for v in self.violations]}


class _Budget:
    def __init__(self, limit):
        self.left = limit

    def spend(self, amount=1):
        self.left -= amount
        if self.left < 0:
            raise TooLarge("path enumeration budget exhausted")


# -- connectivity and margin -------------------------------------------------

def _connectivity_witness(tg: ThresholdGraph, members: frozenset[int]):
    if len(members) <= 1:
        return None
    start = min(members)
    seen = {start}
    stack = [start]
    while stack:
        u = stack.pop()
        for v in tg.adj[u]:
            if v in members and v not in seen:
                seen.add(v)
                stack.append(v)
    if len(seen) == len(members):
        return None
    return (start, min(members - seen))


def _margin_witness(g: SemimetricGraph, labels, i: int, limit: Fraction):
    for u, v, w in g.edges:
        if w <= limit and (labels[u] == i) != (labels[v] == i):
            return (u, v)
    return None


# -- blocks --------------------------------------------------------------------

def _blocks(adj, root: int) -> list[set[int]]:
    """Biconnected components of the component containing ``root``."""
    if not adj[root]:
        return [{root}]
    disc = {root: 0}
    low = {root: 0}
    clock = 1
    blocks = []
    edge_stack = []
    stack = [(root, -1, iter(adj[root]))]
    while stack:
        v, parent, it = stack[-1]
        pushed = False
        for w in it:
            if w not in disc:
                disc[w] = low[w] = clock
                clock += 1
                edge_stack.append((v, w))
                stack.append((w, v, iter(adj[w])))
                pushed = True
                break
            if w != parent and disc[w] < disc[v]:
                if disc[w] < low[v]:
                    low[v] = disc[w]
                edge_stack.append((v, w))
        if pushed:
            continue
        stack.pop()
        if stack:
            u = stack[-1][0]
            if low[v] < low[u]:
                low[u] = low[v]
            if low[v] >= disc[u]:
                block = set()
                while True:
                    e = edge_stack.pop()
                    block.update(e)
                    if e == (u, v):
                        break
                blocks.append(block)
    return blocks


class _BlockTree:
    """Block-cut tree of one connected component."""

    def __init__(self, adj, root: int, foreign):
        self.blocks = _blocks(adj, root)
        owner: dict[int, list[int]] = {}
        for b, block in enumerate(self.blocks):
            for v in block:
                owner.setdefault(v, []).append(b)
        self.node_of = {}
        self.tree: dict[tuple, list[tuple]] = {}
        for b in range(len(self.blocks)):
            self.tree[("B", b)] = []
        for v, bs in owner.items():
            if len(bs) > 1:
                c = ("C", v)
                self.node_of[v] = c
                self.tree[c] = [("B", b) for b in bs]
                for b in bs:
                    self.tree[("B", b)].append(c)
            else:
                self.node_of[v] = ("B", bs[0])
        self.block_has_foreign = [any(foreign(v) for v in block) for block in self.blocks]

    def rooted(self, x: int):
        """Parent pointers and 'foreign block on the path' flags from x."""
        root = self.node_of[x]
        parent = {root: None}
        flag = {root: root[0] == "B" and self.block_has_foreign[root[1]]}
        queue = deque([root])
        while queue:
            t = queue.popleft()
            for s in self.tree[t]:
                if s not in parent:
                    parent[s] = t
                    flag[s] = flag[t] or (s[0] == "B" and self.block_has_foreign[s[1]])
                    queue.append(s)
        return parent, flag

    def path_vertices(self, parent, y: int) -> set[int]:
        out: set[int] = set()
        t = self.node_of[y]
        while t is not None:
            if t[0] == "B":
                out |= self.blocks[t[1]]
            t = parent[t]
        return out


# -- geodesic search -----------------------------------------------------------

def _walk_through_foreign(tg: ThresholdGraph, s: int, foreign) -> list:
    """Shortest walk length from s to every v that visits a foreign node."""
    n = tg.n
    d0 = [INF] * n
    d1 = [INF] * n
    if foreign(s):
        d1[s] = 0
        queue = deque([(s, 1)])
    else:
        d0[s] = 0
        queue = deque([(s, 0)])
    adj = tg.adj
    while queue:
        v, f = queue.popleft()
        dv = (d1 if f else d0)[v] + 1
        for w in adj[v]:
            fw = 1 if (f or foreign(w)) else 0
            table = d1 if fw else d0
            if table[w] == INF:
                table[w] = dv
                queue.append((w, fw))
    return d1


class _GeodesicSearch:
    def __init__(self, tg: ThresholdGraph, members: frozenset[int], gamma: Fraction, budget: _Budget):
        self.tg = tg
        self.members = members
        self.gamma = gamma
        self.budget = budget
        self._dist: dict[int, list] = {}
        self._walk: dict[int, list] = {}

    def foreign(self, v: int) -> bool:
        return v not in self.members

    def dist(self, v):
        if v not in self._dist:
            self.budget.spend(len(self.tg.nodes))
            self._dist[v] = bfs_distances(self.tg, v)
        return self._dist[v]

    def walk(self, v):
        if v not in self._walk:
            self.budget.spend(2 * len(self.tg.nodes))
            self._walk[v] = _walk_through_foreign(self.tg, v, self.foreign)
        return self._walk[v]

    def length_cap(self, d: int) -> int:
        # floor((1 + gamma) * d) for an integer hop count d
        return d + (d * self.gamma.numerator) // self.gamma.denominator

    def run(self):
        tg = self.tg
        seen: set[int] = set()
        for start in sorted(self.members):
            if start in seen or start not in tg.nodes:
                continue
            comp = _component(tg, start)
            seen |= comp
            inside = comp & self.members
            if len(inside) < 2 or len(inside) == len(comp):
                continue
            witness = self._component(comp, sorted(inside))
            if witness is not None:
                return witness
        return None

    def _component(self, comp, inside):
        tree = _BlockTree(self.tg.adj, inside[0], self.foreign)
        for a, x in enumerate(inside):
            parent, flag = tree.rooted(x)
            candidates = [y for y in inside[a + 1:] if flag[tree.node_of[y]]]
            if not candidates:
                continue
            dx = self.dist(x)
            wx = self.walk(x)
            for y in candidates:
                cap = self.length_cap(dx[y])
                if wx[y] > cap:
                    continue
                allowed = tree.path_vertices(parent, y)
                path = self._dfs(x, y, cap, allowed)
                if path is not None:
                    return path
        return None

    def _dfs(self, x, y, cap, allowed):
        dy = self.dist(y)
        wy = self.walk(y)
        adj = self.tg.adj
        foreign = self.foreign
        path = [x]
        on_path = {x}
        stack = [iter(adj[x])]
        tainted = [foreign(x)]
        while stack:
            self.budget.spend()
            ell = len(path)  # edges used after stepping to the next node
            advanced = False
            for w in stack[-1]:
                if w in on_path or w not in allowed:
                    continue
                has_foreign = tainted[-1] or foreign(w)
                if w == y:
                    if has_foreign and ell <= cap:
                        return tuple(path + [y])
                    continue
                rest = dy[w] if has_foreign else wy[w]
                if ell + rest > cap:
                    continue
                path.append(w)
                on_path.add(w)
                tainted.append(has_foreign)
                stack.append(iter(adj[w]))
                advanced = True
                break
            if not advanced:
                stack.pop()
                tainted.pop()
                on_path.discard(path.pop())
        return None


def _component(tg: ThresholdGraph, v: int) -> frozenset[int]:
    seen = {v}
    stack = [v]
    while stack:
        u = stack.pop()
        for w in tg.adj[u]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return frozenset(seen)


def geodesic_witness(tg: ThresholdGraph, members, gamma, budget: int | _Budget = DEFAULT_BUDGET):
    """A simple path violating geodesic convexity of ``members`` in ``tg``, or None."""
    if not isinstance(budget, _Budget):
        budget = _Budget(budget)
    return _GeodesicSearch(tg, frozenset(members), as_fraction(gamma), budget).run()


# -- public checks -------------------------------------------------------------

def check_convex(g: SemimetricGraph, clustering: Clustering, params: ConvexityParams,
                 budget: int = DEFAULT_BUDGET) -> ConvexityVerdict:
    """Definition with one shared radius ``params.eps``."""
    eps = params.eps
    tg = threshold(g, eps)
    spend = _Budget(budget)
    verdict = ConvexityVerdict()
    labels = clustering.labels
    for i, members in enumerate(clustering.clusters()):
        w = _connectivity_witness(tg, members)
        if w is not None:
            verdict.violations.append(Violation(i, CONNECTIVITY, w, eps))
        w = _margin_witness(g, labels, i, params.beta * eps)
        if w is not None:
            verdict.violations.append(Violation(i, MARGIN, w, eps))
        w = geodesic_witness(tg, members, params.gamma, spend)
        if w is not None:
            verdict.violations.append(Violation(i, GEODESIC, w, eps))
    return verdict


def _hereditary_levels(g: SemimetricGraph, members: frozenset[int], eps: Fraction):
    """Weight levels <= eps at which some component holds two cluster nodes and
    a foreign node, and which changed since the last such level."""
    uf = UnionFind(g.n)
    inside = [1 if v in members else 0 for v in range(g.n)]
    outside = [1 - c for c in inside]
    levels = []
    edges = sorted((w, u, v) for u, v, w in g.edges if w <= eps)
    pos = 0
    while pos < len(edges):
        w = edges[pos][0]
        dirty = False
        while pos < len(edges) and edges[pos][0] == w:
            _, u, v = edges[pos]
            pos += 1
            ru, rv = uf.find(u), uf.find(v)
            if ru != rv:
                uf.union(ru, rv)
                r = uf.find(ru)
                other = rv if r == ru else ru
                inside[r] += inside[other]
                outside[r] += outside[other]
            else:
                r = ru
            if inside[r] >= 2 and outside[r] >= 1:
                dirty = True
        if dirty:
            levels.append(w)
    return levels


def check_convex_generalized(g: SemimetricGraph, clustering: Clustering, params: ConvexityParams,
                             budget: int = DEFAULT_BUDGET) -> ConvexityVerdict:
    """Definition with one radius per cluster and hereditary geodesic convexity."""
    radii = params.radius_vector(clustering.k)
    spend = _Budget(budget)
    verdict = ConvexityVerdict()
    labels = clustering.labels
    for i, members in enumerate(clustering.clusters()):
        eps = radii[i]
        tg = threshold(g, eps)
        w = _connectivity_witness(tg, members)
        if w is not None:
            verdict.violations.append(Violation(i, CONNECTIVITY, w, eps))
        w = _margin_witness(g, labels, i, params.beta * eps)
        if w is not None:
            verdict.violations.append(Violation(i, MARGIN, w, eps))
        for level in _hereditary_levels(g, members, eps):
            w = geodesic_witness(threshold(g, level), members, params.gamma, spend)
            if w is not None:
                verdict.violations.append(Violation(i, GEODESIC, w, level))
                break
    return verdict


def replay(g: SemimetricGraph, clustering: Clustering, params: ConvexityParams, v: Violation) -> bool:
    """Re-check a single witness independently of the search that found it."""
    labels = clustering.labels
    i = v.cluster
    if v.prop == MARGIN:
        a, b = v.witness
        d = g.weight(a, b)
        return d is not None and (labels[a] == i) != (labels[b] == i) and d <= params.beta * v.eps
    tg = threshold(g, v.eps)
    members = clustering.cluster(i)
    if v.prop == CONNECTIVITY:
        a, b = v.witness
        sub = tg.induced(members)
        return a in members and b in members and bfs_distances(sub, a)[b] == INF
    path = v.witness
    if len(set(path)) != len(path) or path[0] not in members or path[-1] not in members:
        return False
    if any(not tg.has_edge(p, q) for p, q in zip(path, path[1:])):
        return False
    d = bfs_distances(tg, path[0])[path[-1]]
    edges = len(path) - 1
    return any(p not in members for p in path) and edges <= (1 + params.gamma) * d


# -- radii ---------------------------------------------------------------------

def _singleton_radius(g: SemimetricGraph) -> Fraction:
    levels = g.distinct_weights()
    if not levels:
        raise Disconnected("graph has no edges; a singleton radius is undefined")
    return levels[0]


def min_radius(g: SemimetricGraph, cluster) -> Fraction:
    """Smallest eps such that G_X(eps)[cluster] is connected.

    Singletons get the smallest weight of ``g`` by convention.
    """
    members = frozenset(cluster)
    if not members:
        raise ValueError("empty cluster")
    if len(members) == 1:
        return _singleton_radius(g)
    uf = UnionFind(g.n)
    parts = len(members)
    for u, v, w in sorted(((u, v, w) for u, v, w in g.edges if u in members and v in members),
                          key=lambda e: e[2]):
        if uf.union(u, v):
            parts -= 1
            if parts == 1:
                return w
    raise Disconnected("cluster is not connected at any radius")


def min_connecting_radius(g: SemimetricGraph, cluster) -> Fraction:
    """Smallest eps such that all cluster pairs are connected in G_X(eps)."""
    members = frozenset(cluster)
    if not members:
        raise ValueError("empty cluster")
    if len(members) == 1:
        return _singleton_radius(g)
    uf = UnionFind(g.n)
    count = [1 if v in members else 0 for v in range(g.n)]
    for u, v, w in sorted(g.edges, key=lambda e: e[2]):
        ru, rv = uf.find(u), uf.find(v)
        if ru == rv:
            continue
        uf.union(ru, rv)
        r = uf.find(ru)
        count[r] = count[ru] + count[rv]
        if count[r] == len(members):
            return w
    raise Disconnected("cluster is not connected at any radius")


def cluster_radii(g: SemimetricGraph, clustering: Clustering) -> tuple[Fraction, ...]:
    return tuple(min_radius(g, c) for c in clustering.clusters())


def radius_report(g: SemimetricGraph, clustering: Clustering, params: ConvexityParams) -> list[dict]:
    """Declared radius next to the minimal one, per cluster."""
    out = []
    for i, c in enumerate(clustering.clusters()):
        declared = params.radius(i)
        minimal = min_radius(g, c)
        out.append({
            "cluster": i,
            "declared": str(declared),
            "minimal": str(minimal),
            "differs": declared != minimal,
            "singleton": len(c) == 1,
        })
    return out
