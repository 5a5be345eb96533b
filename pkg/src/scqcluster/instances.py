"""Deterministic instance generators.

Every generator returns an :class:`Instance` carrying the graph, the hidden
clustering, the convexity parameters, one seed per cluster and a
construction record with every random choice.  Planar families place points
on an integer grid (``GRID`` units per unit length) and use Euclidean
distances rounded *up* to a multiple of 1e-6.  Rounding up keeps every
comparison against a grid-exact threshold (``d <= eps`` with eps a multiple
of 1/GRID) identical to the comparison on the true distance.

Several families connect clusters only through single "bridge" edges whose
pattern over clusters is a tree.  A simple path that leaves a cluster through
a bridge can only come back through that same bridge, so such clusterings
satisfy the geodesic property for every gamma and at every radius.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from .convexity import ConvexityParams, ConvexityVerdict, check_convex, check_convex_generalized, min_radius
from .errors import RejectionExhausted
from .graphcore import SemimetricGraph, as_fraction
from .metrics import BALL_CAP
from .oracles import Clustering

GRID = 1000
ROUND = 10**6

CONVEX = "convex"


@dataclass
class Instance:
    graph: SemimetricGraph
    truth: Clustering
    params: ConvexityParams
    seeds: tuple[int, ...]
    family: str
    record: dict = field(default_factory=dict)
    tag: str = CONVEX
    ball_cap: int = BALL_CAP

    @property
    def n(self) -> int:
        return self.graph.n

    @property
    def k(self) -> int:
        return self.truth.k

    def check(self, budget: int | None = None) -> ConvexityVerdict:
        kwargs = {} if budget is None else {"budget": budget}
        if self.params.single:
            return check_convex(self.graph, self.truth, self.params, **kwargs)
        return check_convex_generalized(self.graph, self.truth, self.params, **kwargs)


# -- geometry helpers ---------------------------------------------------------

def grid_point(x: float, y: float) -> tuple[int, int]:
    return (round(x * GRID), round(y * GRID))


def euclid(p: tuple[int, int], q: tuple[int, int]) -> Fraction:
    """Distance between grid points in units, rounded up to 1e-6."""
    sq = (p[0] - q[0]) ** 2 + (p[1] - q[1]) ** 2
    scaled = sq * ROUND * ROUND
    root = math.isqrt(scaled)
    if root * root < scaled:
        root += 1
    return Fraction(root, GRID * ROUND)


def _sq_units(p, q) -> int:
    return (p[0] - q[0]) ** 2 + (p[1] - q[1]) ** 2


def planar_graph(points, cutoff=None, extra=()) -> SemimetricGraph:
    """Euclidean graph on grid points; pairs farther than ``cutoff`` are absent."""
    edges = {}
    limit = None if cutoff is None else as_fraction(cutoff)
    for a in range(len(points)):
        for b in range(a + 1, len(points)):
            w = euclid(points[a], points[b])
            if limit is None or w <= limit:
                edges[(a, b)] = w
    for a, b, w in extra:
        key = (a, b) if a < b else (b, a)
        edges[key] = as_fraction(w)
    return SemimetricGraph(len(points), ((a, b, w) for (a, b), w in edges.items()))


def line_graph(positions, cutoff=None) -> SemimetricGraph:
    """Collinear points at exact rational positions."""
    pos = [as_fraction(p) for p in positions]
    edges = []
    for a in range(len(pos)):
        for b in range(a + 1, len(pos)):
            w = abs(pos[a] - pos[b])
            if cutoff is None or w <= cutoff:
                edges.append((a, b, w))
    return SemimetricGraph(len(pos), edges)


def _relabel(graph: SemimetricGraph, labels, perm):
    """Rename node v to perm[v]."""
    n = graph.n
    new_labels = [0] * n
    for v in range(n):
        new_labels[perm[v]] = labels[v]
    g = SemimetricGraph(n, ((perm[u], perm[v], w) for u, v, w in graph.edges))
    return g, new_labels


def _seeds(truth: Clustering, rng: random.Random | None) -> tuple[int, ...]:
    out = []
    for members in truth.clusters():
        pool = sorted(members)
        out.append(rng.choice(pool) if rng is not None else pool[0])
    return tuple(out)


# -- planar reconstructions ----------------------------------------------------

def whirl(n: int = 40, beta="1/4", gamma="1/2", rng_seed: int = 0) -> Instance:
    """Two interleaved spiral arms touching at a single point near the centre.

    Certified reconstruction: arms are Archimedean spirals r = a + b*phi with
    arc spacing below 1 and a gap of about pi*b > 1 between the arms; one
    extra tip on arm B sits between 1/2 and 1 from the innermost point of arm
    A and farther than 1 from every other A point.  eps = 1.
    """
    if n < 14:
        raise ValueError("whirl needs at least 14 points")
    rng = random.Random(rng_seed)
    b = 0.5
    a0 = 1.6
    spacing = 0.85 + 0.05 * rng.random()
    per_a = n // 2 - 1
    arms = []
    for shift, count in ((0.0, per_a), (math.pi, n - per_a)):
        pts = []
        phi = 0.0
        for _ in range(count):
            r = a0 + b * phi
            pts.append(grid_point(r * math.cos(phi + shift), r * math.sin(phi + shift)))
            phi += spacing / math.hypot(r, b)
        arms.append(pts)
    arm_a, arm_b = arms
    one = GRID * GRID
    anchor = arm_a[0]

    def around(p, dist, count=96):
        for t in range(count):
            ang = 2 * math.pi * t / count
            yield (p[0] + round(dist * GRID * math.cos(ang)), p[1] + round(dist * GRID * math.sin(ang)))

    def clear_of_a(p, skip_anchor):
        return all(_sq_units(p, q) > one for q in (arm_a[1:] if skip_anchor else arm_a))

    def touches_b(p):
        return any(_sq_units(p, q) <= one for q in arm_b[:n - per_a - 2])

    # the tip sits 0.55 from A's innermost point; when it cannot reach arm B
    # directly, one connector point links it to B
    extra = None
    for tip in around(anchor, 0.55):
        if not clear_of_a(tip, True):
            continue
        if touches_b(tip):
            extra = [tip]
            break
        for link in around(tip, 0.9):
            if clear_of_a(link, False) and touches_b(link):
                extra = [link, tip]
                break
        if extra:
            break
    if extra is None:
        raise RuntimeError("could not place the whirl tip")
    tip = extra[-1]
    arm_b = arm_b[:n - per_a - len(extra)]
    points = arm_a + arm_b + extra
    labels = [0] * len(arm_a) + [1] * (len(arm_b) + len(extra))
    for p in arm_a:
        for q in arm_b:
            assert _sq_units(p, q) > one, "arms must not touch except at the tip"
    g = planar_graph(points, cutoff=2)
    truth = Clustering(tuple(labels), 2)
    params = ConvexityParams(beta, gamma, Fraction(1))
    record = {
        "reconstruction": "certified",
        "spiral_b": b,
        "spiral_a": a0,
        "arc_spacing": spacing,
        "tip": list(tip),
        "anchor": 0,
        "cutoff": "2",
    }
    return Instance(g, truth, params, _seeds(truth, None), "whirl", record)


def oort(ring: int = 40, beta="1/2", gamma="1/10", rng_seed: int = 0) -> Instance:
    """A fine outer ring (C_1) around a coarse plus-shaped inner cluster (C_2).

    Certified reconstruction.  Ring chords are about 0.95 and the inner
    spacing is 1.4, so eps_1 < eps_2.  The tip of the inner +x arm is 0.85 from
    one ring point: a single cross edge at every radius up to eps_1, and every
    cross edge up to eps_2 touches that tip only.  Radii are the exact minimal
    ones of the built point set.
    """
    rng = random.Random(rng_seed)
    radius = ring * 0.95 / (2 * math.pi)
    offset = rng.random() * 1e-3
    ring_pts = [grid_point(radius * math.cos(2 * math.pi * t / ring + offset),
                           radius * math.sin(2 * math.pi * t / ring + offset)) for t in range(ring)]
    start = min(range(ring), key=lambda t: -ring_pts[t][0])
    step = 1.4
    contact = ring_pts[start]
    tip_x = contact[0] / GRID - 0.85
    inner = [grid_point(0, 0)]
    for dx, dy in ((1, 0), (-1, 0), (0, 1), (0, -1)):
        reach = tip_x - step if dx == 1 else radius - 2.4
        t = 1
        while t * step < reach:
            inner.append(grid_point(dx * t * step, dy * t * step))
            t += 1
        if dx == 1:
            inner.append(grid_point(reach, 0))
    tip = grid_point(tip_x, contact[1] / GRID)
    inner.append(tip)
    points = ring_pts + inner
    labels = [0] * ring + [1] * len(inner)
    g = planar_graph(points, cutoff=3)
    truth = Clustering(tuple(labels), 2)
    radii = tuple(min_radius(g, c) for c in truth.clusters())
    if not radii[0] < radii[1]:
        raise RuntimeError("oort construction lost its two scales")
    params = ConvexityParams(beta, gamma, radii)
    record = {
        "reconstruction": "certified",
        "ring_radius": radius,
        "inner_step": step,
        "contact": start,
        "radii": [str(r) for r in radii],
        "cutoff": "3",
    }
    return Instance(g, truth, params, _seeds(truth, None), "oort", record)


# -- degenerate examples ------------------------------------------------------------

def violate_connectivity(per_group: int = 3, groups: int = 3, beta="1/2", gamma="1/2", rng_seed: int = 0) -> Instance:
    """Far-apart groups of diameter <= eps, alternately labelled C_1, C_2, C_1, ...

    Cluster C_1 owns two or more groups, so it is disconnected at eps = 1.
    """
    if groups < 3:
        raise ValueError("need at least three groups so that C_1 is split")
    spacing = Fraction(1, max(per_group - 1, 1))
    pos, labels = [], []
    for g_idx in range(groups):
        for t in range(per_group):
            pos.append(3 * g_idx + t * spacing)
            labels.append(g_idx % 2)
    g = line_graph(pos)
    truth = Clustering(tuple(labels), 2)
    params = ConvexityParams(beta, gamma, Fraction(1))
    return Instance(g, truth, params, _seeds(truth, None), "violate-connectivity",
                    {"positions": [str(p) for p in pos], "gap": "2"}, tag="connectivity")


def violate_margin(per_cluster: int = 6, beta="1/2", gamma="1/2", rng_seed: int = 0) -> Instance:
    """Two collinear chains with spacing eps whose facing ends are delta = beta*eps/2 apart."""
    beta_q = as_fraction(beta)
    delta = beta_q / 2
    c1 = [Fraction(t) for t in range(per_cluster)]
    c2 = [c1[-1] + delta + t for t in range(per_cluster)]
    g = line_graph(c1 + c2)
    truth = Clustering(tuple([0] * per_cluster + [1] * per_cluster), 2)
    params = ConvexityParams(beta, gamma, Fraction(1))
    return Instance(g, truth, params, _seeds(truth, None), "violate-margin",
                    {"delta": str(delta)}, tag="metric-margin")


def violate_geodesic(n: int = 20, beta="1/4", gamma="1/2", rng_seed: int = 0, seeds=None) -> Instance:
    """n collinear points spaced eps/2, labels alternating between the clusters."""
    if n < 6:
        raise ValueError("need at least six points")
    pos = [Fraction(t, 2) for t in range(n)]
    g = line_graph(pos)
    truth = Clustering(tuple(t % 2 for t in range(n)), 2)
    params = ConvexityParams(beta, gamma, Fraction(1))
    chosen = tuple(seeds) if seeds is not None else _seeds(truth, random.Random(rng_seed))
    return Instance(g, truth, params, chosen, "violate-geodesic", {"spacing": "1/2"}, tag="geodesic")


# -- lower-bound constructions ------------------------------------------------------

def caterpillar(n: int = 30, beta="1/2", gamma="1/2", rng_seed: int = 0) -> Instance:
    """LOW = (j, 0) for j = 1..2n/3, UP = (2j, 1) for j = 1..n/3; C_2 = one random UP point."""
    if n % 3 or n < 6:
        raise ValueError("caterpillar needs n divisible by 3 (and n >= 6)")
    rng = random.Random(rng_seed)
    low = [(j * GRID, 0) for j in range(1, 2 * n // 3 + 1)]
    up = [(2 * j * GRID, GRID) for j in range(1, n // 3 + 1)]
    points = low + up
    hidden = rng.randrange(len(up))
    z = len(low) + hidden
    labels = [0] * n
    labels[z] = 1
    g = planar_graph(points)
    truth = Clustering(tuple(labels), 2)
    params = ConvexityParams(beta, gamma, Fraction(1))
    seeds = (0, z)
    record = {"up": list(range(len(low), n)), "hidden": z, "hidden_index": hidden}
    return Instance(g, truth, params, seeds, "caterpillar", record, ball_cap=max(BALL_CAP, n))


def complete_random(n: int = 64, beta="1/2", gamma="1/2", rng_seed: int = 0) -> Instance:
    """Complete graph with unit distances and a uniformly random 2-partition (both parts non-empty)."""
    if n < 2:
        raise ValueError("need at least two nodes")
    rng = random.Random(rng_seed)
    while True:
        labels = [rng.randrange(2) for _ in range(n)]
        if 0 < sum(labels) < n:
            break
    g = SemimetricGraph(n, ((u, v, 1) for u in range(n) for v in range(u + 1, n)))
    truth = Clustering(tuple(labels), 2)
    params = ConvexityParams(beta, gamma, Fraction(1))
    return Instance(g, truth, params, _seeds(truth, rng), "complete-random",
                    {"labels": labels}, ball_cap=max(BALL_CAP, n))


def radii_path(n: int = 128, k: int = 2, beta="1/2", gamma="1", rng_seed: int = 0) -> Instance:
    """K = k/2 disjoint paths with increasing weights 1 + beta*J/n, J the global edge index.

    On every path a cut index j* (1-based, uniform in 2..len-1) splits it
    into a prefix cluster and a suffix cluster.
    """
    if k < 2 or k % 2:
        raise ValueError("radii-path needs an even k >= 2")
    paths = k // 2
    if n < 3 * paths:
        raise ValueError("paths need at least three nodes each")
    rng = random.Random(rng_seed)
    beta_q = as_fraction(beta)
    sizes = [n // paths + (1 if h < n % paths else 0) for h in range(paths)]
    edges, labels, cuts = [], [], []
    node = 0
    J = 0
    for h, size in enumerate(sizes):
        j_star = rng.randint(2, size - 1)
        cuts.append(j_star)
        for t in range(size - 1):
            J += 1
            edges.append((node + t, node + t + 1, 1 + beta_q * J / n))
        labels += [2 * h] * j_star + [2 * h + 1] * (size - j_star)
        node += size
    g = SemimetricGraph(n, edges)
    truth = Clustering(tuple(labels), k)
    radii = tuple(min_radius(g, c) for c in truth.clusters())
    params = ConvexityParams(beta, gamma, radii)
    record = {"j_star": cuts, "path_sizes": sizes, "radii": [str(r) for r in radii]}
    return Instance(g, truth, params, _seeds(truth, None), "radii-path", record)


# -- random convex families ---------------------------------------------------------------

def _blob(rng, center, count, scale, min_gap=0.6, max_step=0.95, tries=20000):
    """Points grown one at a time: each new point lies within ``max_step*scale``
    of an existing one and at least ``min_gap*scale`` from all of them."""
    cx, cy = center
    pts = [grid_point(cx, cy)]
    hi = (max_step * scale * GRID) ** 2
    lo = (min_gap * scale * GRID) ** 2
    attempts = 0
    while len(pts) < count:
        attempts += 1
        if attempts > tries:
            raise RejectionExhausted("could not grow a blob")
        base = rng.choice(pts)
        ang = rng.random() * 2 * math.pi
        length = scale * (min_gap + (max_step - min_gap) * rng.random())
        cand = (base[0] + round(length * GRID * math.cos(ang)), base[1] + round(length * GRID * math.sin(ang)))
        if _sq_units(cand, base) > hi:
            continue
        if any(_sq_units(cand, p) < lo for p in pts):
            continue
        pts.append(cand)
    return pts


def _split(rng, n, k, least=3):
    if n < least * k:
        raise ValueError(f"need at least {least} points per cluster")
    sizes = [least] * k
    for _ in range(n - least * k):
        sizes[rng.randrange(k)] += 1
    return sizes


def _bridged(rng, n, k, scales, beta, cutoff_factor, identical):
    sizes = _split(rng, n, k)
    spread = 40 * max(scales) * math.sqrt(max(sizes))
    points, labels, owner = [], [], []
    for i, size in enumerate(sizes):
        blob = _blob(rng, (i * spread, (i % 2) * spread / 3), size, scales[i])
        owner.append(list(range(len(points), len(points) + size)))
        points += blob
        labels += [i] * size
    # intra-cluster edges only; clusters are far apart anyway
    edges = {}
    for i in range(k):
        limit = Fraction(cutoff_factor) * Fraction(scales[i]).limit_denominator(1000)
        for a_pos, a in enumerate(owner[i]):
            for b in owner[i][a_pos + 1:]:
                w = euclid(points[a], points[b])
                if w <= limit:
                    edges[(a, b)] = w
    base = SemimetricGraph(len(points), ((a, b, w) for (a, b), w in edges.items()))
    truth0 = Clustering(tuple(labels), k)
    radii = [min_radius(base, c) for c in truth0.clusters()]
    if identical:
        radii = [max(radii)] * k
    beta_q = as_fraction(beta)
    bridges = []
    for i in range(1, k):
        j = rng.randrange(i)
        lo = beta_q * max(radii[i], radii[j])
        hi = min(radii[i], radii[j])
        if lo >= hi:
            hi = lo * Fraction(17, 16)
        w = lo + (hi - lo) * Fraction(rng.randint(1, 8), 8)
        a = rng.choice(owner[i])
        b = rng.choice(owner[j])
        edges[(min(a, b), max(a, b))] = w
        bridges.append((a, b, str(w), i, j))
    g = SemimetricGraph(len(points), ((a, b, w) for (a, b), w in edges.items()))
    perm = list(range(len(points)))
    rng.shuffle(perm)
    g, new_labels = _relabel(g, labels, perm)
    truth = Clustering(tuple(new_labels), k)
    record = {
        "sizes": sizes,
        "scales": [str(s) for s in scales],
        "bridges": [(perm[a], perm[b], w, i, j) for a, b, w, i, j in bridges],
        "permutation": perm,
    }
    return g, truth, tuple(radii), record


def _certified(make: Callable[[random.Random], Instance], rng_seed: int, attempts: int = 100) -> Instance:
    rng = random.Random(rng_seed)
    for attempt in range(attempts):
        inst = make(rng)
        if inst.check().ok:
            inst.record["attempts"] = attempt + 1
            return inst
    raise RejectionExhausted(f"no certified instance after {attempts} attempts")


def random_convex(n: int = 60, k: int = 3, beta="1/2", gamma="1/2", rng_seed: int = 0,
                  cutoff_factor="3/2") -> Instance:
    """k random blobs (spacing in [0.6, 0.95], one shared radius) joined by tree bridges."""
    def make(rng):
        g, truth, radii, record = _bridged(rng, n, k, [1.0] * k, beta, cutoff_factor, identical=True)
        params = ConvexityParams(beta, gamma, radii[0])
        return Instance(g, truth, params, _seeds(truth, rng), "random-convex", record)
    return _certified(make, rng_seed)


def random_two_scale(n: int = 60, k: int = 3, beta="1/2", gamma="1/2", rng_seed: int = 0,
                     cutoff_factor="3/2", ratio="3/2") -> Instance:
    """Like random-convex, but each blob uses scale 1 or ``ratio`` and keeps its own radius."""
    ratio_q = float(as_fraction(ratio))

    def make(rng):
        scales = [1.0] + [rng.choice((1.0, ratio_q)) for _ in range(k - 1)]
        if k > 1 and all(s == 1.0 for s in scales):
            scales[rng.randrange(1, k)] = ratio_q
        g, truth, radii, record = _bridged(rng, n, k, scales, beta, cutoff_factor, identical=False)
        params = ConvexityParams(beta, gamma, radii)
        record["radii"] = [str(r) for r in radii]
        return Instance(g, truth, params, _seeds(truth, rng), "random-two-scale", record)
    return _certified(make, rng_seed)


FAMILIES = {
    "whirl": whirl,
    "oort": oort,
    "violate-connectivity": violate_connectivity,
    "violate-margin": violate_margin,
    "violate-geodesic": violate_geodesic,
    "caterpillar": caterpillar,
    "complete-random": complete_random,
    "radii-path": radii_path,
    "random-convex": random_convex,
    "random-two-scale": random_two_scale,
}


def generate(family: str, params: dict | None = None, rng_seed: int = 0) -> Instance:
    if family not in FAMILIES:
        raise ValueError(f"unknown family {family!r}; choose from {sorted(FAMILIES)}")
    return FAMILIES[family](rng_seed=rng_seed, **(params or {}))


# -- membership probing without seeds -------------------------------------------------------

def probe_hidden_point(inst: Instance, oracle, adaptive: bool = False) -> tuple[int, int]:
    """Locate the hidden UP point of a caterpillar with SCQ only.

    The prober knows the construction: LOW points are always in C_1, so the
    first LOW point is a safe reference.  UP points are probed in id order;
    the last one never needs a query.  The non-adaptive prober asks about
    every other UP point; the adaptive one stops at the first negative
    answer.  Returns (hidden node, queries used).
    """
    up = inst.record["up"]
    ref = 0
    before = oracle.scq_count
    found = None
    for x in up[:-1]:
        if not oracle.scq(ref, x) and found is None:
            found = x
            if adaptive:
                break
    if found is None:
        found = up[-1]
    return found, oracle.scq_count - before


def expected_probe_cost(m: int, adaptive: bool = False) -> Fraction:
    """Exact expected query count of :func:`probe_hidden_point` over a uniform
    hidden point among m UP points, by enumerating its position."""
    total = 0
    for pos in range(m):
        total += min(pos + 1, m - 1) if adaptive else m - 1
    return Fraction(total, m)
