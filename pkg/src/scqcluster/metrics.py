"""Exact packing numbers, the density constant mu(X) and P*(eta).

A packing of separation ``sep`` inside a ball is a clique in the graph whose
edges join pairs at distance > sep (missing edges count as infinitely far),
so every packing number here is an exact maximum-clique computation.
"""

from __future__ import annotations

import math
import weakref
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import BallTooLarge
from .graphcore import SemimetricGraph, as_fraction

BALL_CAP = 40

_profiles: "weakref.WeakKeyDictionary[SemimetricGraph, dict]" = weakref.WeakKeyDictionary()


def ball(g: SemimetricGraph, center: int, r) -> list[int]:
    """Closed ball B(center, r) as a sorted node list."""
    r = as_fraction(r)
    pts = [center] + [v for v, w in g.neighbors(center) if w <= r]
    pts.sort()
    return pts


def _color_sort(cand: int, adj: list[int]):
    order, bounds = [], []
    uncolored = cand
    color = 0
    while uncolored:
        color += 1
        q = uncolored
        while q:
            v = (q & -q).bit_length() - 1
            q &= ~adj[v] & ~(1 << v)
            uncolored &= ~(1 << v)
            order.append(v)
            bounds.append(color)
    return order, bounds


def max_clique_size(adj: list[int]) -> int:
    """Size of a maximum clique; ``adj[v]`` is the neighbour bitmask of v.

    Branch and bound with greedy-colouring upper bounds.
    """
    n = len(adj)
    if n == 0:
        return 0
    best = 0

    def expand(cand: int, size: int):
        nonlocal best
        order, bounds = _color_sort(cand, adj)
        for idx in range(len(order) - 1, -1, -1):
            if size + bounds[idx] <= best:
                return
            v = order[idx]
            new = cand & adj[v]
            if new:
                expand(new, size + 1)
            elif size + 1 > best:
                best = size + 1
            cand &= ~(1 << v)

    expand((1 << n) - 1, 0)
    return best


def packing_of_points(g: SemimetricGraph, pts: list[int], sep: Fraction) -> int:
    """Largest subset of ``pts`` with all pairwise distances > sep."""
    index = {x: i for i, x in enumerate(pts)}
    size = len(pts)
    full = (1 << size) - 1
    far = []
    for i, x in enumerate(pts):
        near = 1 << i
        for v, w in g.neighbors(x):
            j = index.get(v)
            if j is not None and w <= sep:
                near |= 1 << j
        far.append(full & ~near)
    if all(f == full & ~(1 << i) for i, f in enumerate(far)):
        return size
    return max_clique_size(far)


def packing_number(g: SemimetricGraph, center: int, r, sep, cap: int = BALL_CAP) -> int:
    """PackNum(B(center, r), sep), exact; balls larger than ``cap`` are refused."""
    r, sep = as_fraction(r), as_fraction(sep)
    if r <= 0 or sep <= 0:
        raise ValueError("r and sep must be positive")
    pts = ball(g, center, r)
    if len(pts) > cap:
        raise BallTooLarge(f"ball B({center}, {r}) has {len(pts)} points > cap {cap}")
    return packing_of_points(g, pts, sep)


def _radii(g: SemimetricGraph, x: int) -> list[Fraction]:
    # B(x, r) only changes when r crosses a weight incident to x, and between
    # two such values the separation eta*r only grows, so the left endpoints
    # are the only candidates for the maximum.
    return sorted({w for _, w in g.neighbors(x)})


def _scan(g: SemimetricGraph, eta: Fraction, cap: int) -> int:
    best = 1 if g.n else 0
    for x in range(g.n):
        for r in _radii(g, x):
            best = max(best, packing_number(g, x, r, eta * r, cap))
    return best


@dataclass
class PackingProfile:
    mu: int
    dens: float
    cap: int = BALL_CAP
    pstar_cache: dict = field(default_factory=dict)


def _cache(g: SemimetricGraph, cap: int) -> dict:
    per_graph = _profiles.setdefault(g, {})
    return per_graph.setdefault(cap, {})


def pstar(g: SemimetricGraph, eta, cap: int = BALL_CAP) -> int:
    """P*(eta): the maximum of PackNum(B(x, r), eta * r) over x and r > 0.

    Values of eta above 1 are accepted (the margin-based separator bound can
    need them when its enclosing ball is small).
    """
    eta = as_fraction(eta)
    if eta <= 0:
        raise ValueError("eta must be positive")
    cache = _cache(g, cap)
    if eta not in cache:
        cache[eta] = _scan(g, eta, cap)
    return cache[eta]


def density_constant(g: SemimetricGraph, cap: int = BALL_CAP) -> PackingProfile:
    """mu(X) = P*(1/2) and dens(X) = log2 mu(X)."""
    mu = pstar(g, Fraction(1, 2), cap)
    profile = PackingProfile(mu=mu, dens=math.log2(mu) if mu else 0.0, cap=cap)
    profile.pstar_cache = _cache(g, cap)
    return profile


def ceil_log2(x: Fraction) -> int:
    """Smallest integer t >= 0 with 2**t >= x."""
    x = as_fraction(x)
    t = 0
    while (1 << t) < x:
        t += 1
    return t


def packing_bound(mu: int, eta) -> int:
    """mu ** ceil(log2(1/eta)), an upper bound on P*(eta) for 0 < eta < 1."""
    eta = as_fraction(eta)
    return mu ** ceil_log2(1 / eta)
