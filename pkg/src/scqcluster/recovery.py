"""Exact cluster recovery from same-cluster and seed queries.

Everything here talks to the ground truth only through an oracle object with
``scq(x, y)``, ``seed(S, i)``, ``k`` and (optionally) ``phase(name)``.

All hop-count comparisons against 1/gamma and 2/gamma + 1 are done by integer
cross-multiplication, never in floating point.  Every "choose any node" in the
pseudocode resolves to the smallest node id.
"""

from __future__ import annotations

import math
import time
from contextlib import nullcontext
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

from .errors import BallTooLarge, ContractViolation, PartitionError
from .graphcore import (
    INF,
    SemimetricGraph,
    ThresholdGraph,
    as_fraction,
    bfs_distances,
    connected_component,
    shortest_path,
    threshold,
)
from .metrics import BALL_CAP, ceil_log2, pstar
from .oracles import Clustering


# -- exact comparisons -------------------------------------------------------

def hops_below_inverse(d, gamma: Fraction) -> bool:
    """d < 1/gamma for an integer hop count d (INF is never below)."""
    if d == INF:
        return False
    return d * gamma.numerator < gamma.denominator


def hops_far_from(d, gamma: Fraction) -> bool:
    """d >= 2/gamma + 1 for an integer hop count d (INF always is)."""
    if d == INF:
        return True
    return (d - 1) * gamma.numerator >= 2 * gamma.denominator


def _phase(oracle, name):
    enter = getattr(oracle, "phase", None)
    return enter(name) if enter is not None else nullcontext()


# -- margin-based separator ------------------------------------------------------

def margin_components(g: ThresholdGraph, z, limit: Fraction) -> list[list[int]]:
    """Components of the graph on ``z`` joining pairs at distance <= limit.

    Distances come from the weighted graph ``g`` was thresholded from.
    Components are returned sorted, ordered by their smallest node.
    """
    src = g.source
    if src is None:
        raise ValueError("margin components need a threshold graph with a source")
    inside = set(z)
    seen: set[int] = set()
    out = []
    for start in sorted(inside):
        if start in seen:
            continue
        seen.add(start)
        comp = [start]
        stack = [start]
        while stack:
            u = stack.pop()
            for v, w in src.neighbors(u):
                if w <= limit and v in inside and v not in seen:
                    seen.add(v)
                    comp.append(v)
                    stack.append(v)
        comp.sort()
        out.append(comp)
    return out


def mbs(g: ThresholdGraph, z, eps, beta, u: int, oracle) -> frozenset[int]:
    """Z ∩ C(u) with one SCQ per component of the beta*eps graph on Z."""
    limit = as_fraction(beta) * as_fraction(eps)
    found: set[int] = set()
    for comp in margin_components(g, z, limit):
        if oracle.scq(comp[0], u):
            found.update(comp)
    return frozenset(found)


# -- cut edges and separators ----------------------------------------------------

def find_cut_edge(path: Sequence[int], i: int, oracle, s_i: int) -> tuple[int, int]:
    """Binary search for the cut edge of a C_i-prefixed path.

    ``path[0]`` is assumed in C_i and ``path[-1]`` outside it; neither end is
    queried.  ``i`` is carried for symmetry with the other routines.
    """
    if len(path) < 2:
        raise ValueError("a cut edge needs a path of at least two nodes")
    a, b = 0, len(path) - 1
    while b - a > 1:
        m = (a + b) // 2
        if oracle.scq(s_i, path[m]):
            a = m
        else:
            b = m
    return path[a], path[b]


@dataclass(frozen=True)
class SeparatorPair:
    s_i: frozenset[int]
    s_j: frozenset[int]
    u_i: int
    u_j: int
    z: frozenset[int] = frozenset()


def cluster_separator(g: ThresholdGraph, u_i: int, u_j: int, eps, beta, gamma, oracle,
                      dist_i=None, dist_j=None) -> SeparatorPair:
    """Split V(g) into (S_i, S_j) around the cut edge (u_i, u_j)."""
    gamma = as_fraction(gamma)
    if dist_i is None:
        dist_i = bfs_distances(g, u_i)
    if dist_j is None:
        dist_j = bfs_distances(g, u_j)
    z = frozenset(x for x in g.nodes if hops_below_inverse(dist_i[x], gamma))
    z_i = mbs(g, z, eps, beta, u_i, oracle)
    s_i = set(z_i)
    s_j = set(z - z_i)
    for x in g.nodes:
        if x in z:
            continue
        # unreachable nodes compare INF <= INF and land on the u_i side
        if dist_i[x] <= dist_j[x]:
            s_i.add(x)
        else:
            s_j.add(x)
    return SeparatorPair(frozenset(s_i), frozenset(s_j), u_i, u_j, z)


# -- seed discovery -----------------------------------------------------------------

@dataclass
class SeedDiscoveryState:
    """Bookkeeping carried across the iterations of one single-cluster run.

    ``z_minus_zi`` holds known non-C_i nodes near some cut endpoint in
    ``u_list``; ``active`` holds the nodes still far from every endpoint.
    """
    u_list: list[int] = field(default_factory=list)
    z_minus_zi: set[int] = field(default_factory=set)
    active: set[int] | None = None
    naive: bool = False
    _pending: list[int] = field(default_factory=list)
    _dist: dict[int, list] = field(default_factory=dict)

    def add_endpoint(self, g: ThresholdGraph, u: int):
        self.u_list.append(u)
        self._pending.append(u)
        if u not in self._dist:
            self._dist[u] = bfs_distances(g, u)

    def dist(self, g: ThresholdGraph, u: int):
        if u not in self._dist:
            self._dist[u] = bfs_distances(g, u)
        return self._dist[u]


def _near(dist, r_i, gamma):
    return [x for x in r_i if not hops_far_from(dist[x], gamma)]


def find_new_seed(g: ThresholdGraph, r_i, eps, beta, gamma, seed_vec: Sequence, state: SeedDiscoveryState,
                  i: int, oracle):
    """A node of R_i outside C_i, or None when R_i = C_i."""
    gamma = as_fraction(gamma)
    r_set = r_i if isinstance(r_i, (set, frozenset)) else set(r_i)
    s_i = seed_vec[i]
    others = [s for h, s in enumerate(seed_vec) if h != i and s is not None and s in r_set and s != s_i]
    if others:
        return min(others)

    if state.active is None:
        state.active = set(r_set)

    if state.naive:
        for u in state.u_list:
            dist = state.dist(g, u)
            z = _near(dist, r_set, gamma)
            z_i = mbs(g, z, eps, beta, u, oracle)
            rest = set(z) - z_i
            if rest:
                return min(rest)
        state._pending.clear()
    else:
        for u in state._pending:
            dist = state.dist(g, u)
            z = _near(dist, r_set, gamma)
            z_i = mbs(g, z, eps, beta, u, oracle)
            state.z_minus_zi |= set(z) - z_i
        state._pending.clear()
        state.z_minus_zi &= r_set
        if state.z_minus_zi:
            return min(state.z_minus_zi)

    for u in state.u_list:
        dist = state.dist(g, u)
        state.active -= {x for x in state.active if not hops_far_from(dist[x], gamma)}
    for x in sorted(state.active & r_set):
        if any(y not in r_set for y in g.adj[x]):
            return x
    return None


# -- single cluster --------------------------------------------------------------------

def recover_single_cluster(g: ThresholdGraph, eps, beta, gamma, seed_vec: Sequence, i: int, oracle,
                           naive: bool = False, debug: bool = False,
                           trace: Callable[[dict], None] | None = None) -> tuple[frozenset[int], int]:
    """Return (C_i, number of separator rounds).

    ``trace`` receives one dict per round with the current R_i, the shortest
    path, the cut edge and the separator.  ``debug`` spends uncounted queries
    on sanity checks of each cut edge and separator.
    """
    beta, gamma, eps = as_fraction(beta), as_fraction(gamma), as_fraction(eps)
    s_i = seed_vec[i]
    if s_i is None or s_i not in g.nodes:
        raise ValueError(f"seed of cluster {i} is not a vertex of the graph")
    r_i = connected_component(g, s_i)
    state = SeedDiscoveryState(naive=naive)
    limit = sum(1 for s in seed_vec if s is not None)
    rounds = 0
    while True:
        with _phase(oracle, "findnewseed"):
            s_h = find_new_seed(g, r_i, eps, beta, gamma, seed_vec, state, i, oracle)
        if s_h is None:
            return r_i, rounds
        rounds += 1
        if rounds > limit:
            raise ContractViolation(f"cluster {i}: more than {limit} separator rounds", r_i)
        sub = g.induced(r_i)
        path = shortest_path(sub, s_i, s_h)
        with _phase(oracle, "findcutedge"):
            u_i, u_j = find_cut_edge(path, i, oracle, s_i)
        if debug:
            _check_cut_edge(oracle, s_i, u_i, u_j, i)
        state.add_endpoint(g, u_i)
        with _phase(oracle, "separator"):
            sep = cluster_separator(g, u_i, u_j, eps, beta, gamma, oracle, dist_i=state.dist(g, u_i))
        if debug:
            _check_separator(oracle, s_i, sep, i)
        if s_i not in sep.s_i:
            raise ContractViolation(f"cluster {i}: separator put the seed on the wrong side", (s_i,))
        before = r_i
        r_i = connected_component(g.induced(r_i & sep.s_i), s_i)
        if trace is not None:
            trace({"cluster": i, "round": rounds, "r_before": before, "path": tuple(path),
                   "cut_edge": (u_i, u_j), "separator": sep, "r_after": r_i, "graph": g})


def _uncounted(oracle):
    enter = getattr(oracle, "uncounted", None)
    return enter() if enter is not None else nullcontext()


def _check_cut_edge(oracle, s_i, u_i, u_j, i):
    with _uncounted(oracle):
        ok = oracle.scq(s_i, u_i) and not oracle.scq(s_i, u_j)
    if not ok:
        raise ContractViolation(f"cluster {i}: ({u_i}, {u_j}) is not a cut edge", (u_i, u_j))


def _check_separator(oracle, s_i, sep: SeparatorPair, i):
    with _uncounted(oracle):
        bad = [x for x in sep.s_j if oracle.scq(s_i, x)]
        bad += [x for x in sep.s_i if oracle.scq(sep.u_j, x)]
    if bad:
        raise ContractViolation(f"cluster {i}: separator contract broken", bad)


# -- full recovery ------------------------------------------------------------------------

def query_budget(g: SemimetricGraph, k: int, beta, gamma, cap: int = BALL_CAP) -> int:
    """k^2 ceil(log2 n) + k^2 P*(beta gamma) + k^2 P*(beta gamma / (2 + gamma))."""
    beta, gamma = as_fraction(beta), as_fraction(gamma)
    k2 = k * k
    return (k2 * ceil_log2(max(g.n, 1))
            + k2 * pstar(g, beta * gamma, cap)
            + k2 * pstar(g, beta * gamma / (2 + gamma), cap))


@dataclass
class RecoveryReport:
    predicted: Clustering | None
    scq_used: int
    seed_used: int
    phases: dict
    budget: int | None
    rounds: list[int]
    elapsed: float = 0.0

    @property
    def within_budget(self) -> bool | None:
        return None if self.budget is None else self.scq_used <= self.budget

    def to_dict(self, with_time: bool = False) -> dict:
        out = {
            "predicted": list(self.predicted.labels) if self.predicted is not None else None,
            "scq": self.scq_used,
            "seed": self.seed_used,
            "phases": self.phases,
            "budget": self.budget,
            "within_budget": self.within_budget,
            "rounds": self.rounds,
        }
        if with_time:
            out["elapsed"] = self.elapsed
        return out


def _assemble(n: int, found: Sequence[frozenset[int]]) -> Clustering:
    owner: dict[int, int] = {}
    clash = set()
    for i, members in enumerate(found):
        for x in members:
            if x in owner:
                clash.add(x)
            owner[x] = i
    if clash:
        raise PartitionError("recovered clusters overlap", clash)
    missing = set(range(n)) - owner.keys()
    if missing:
        raise PartitionError("recovered clusters do not cover every node", missing)
    empty = [i for i, c in enumerate(found) if not c]
    if empty:
        raise PartitionError(f"clusters {empty} came back empty")
    return Clustering.from_sets(n, found)


def _counts(oracle):
    return getattr(oracle, "scq_count", 0), getattr(oracle, "seed_count", 0)


def _report(oracle, start_counts, predicted, budget, rounds, started):
    scq0, seed0 = start_counts
    scq1, seed1 = _counts(oracle)
    phases = oracle.phase_breakdown() if hasattr(oracle, "phase_breakdown") else {}
    return RecoveryReport(predicted, scq1 - scq0, seed1 - seed0, phases, budget, rounds,
                          time.perf_counter() - started)


def _budget_or_none(g, k, beta, gamma, cap):
    try:
        return query_budget(g, k, beta, gamma, cap)
    except BallTooLarge:
        return None


def recover_clustering(g: SemimetricGraph, eps, beta, gamma, seeds: Sequence[int], oracle,
                       naive: bool = False, debug: bool = False, trace=None,
                       with_budget: bool = True, cap: int = BALL_CAP) -> tuple[Clustering, RecoveryReport]:
    """Recover every cluster on G_X(eps) with the given seed vector."""
    started = time.perf_counter()
    counts = _counts(oracle)
    k = len(seeds)
    tg = threshold(g, eps)
    found, rounds = [], []
    for i in range(k):
        c, r = recover_single_cluster(tg, eps, beta, gamma, seeds, i, oracle,
                                      naive=naive, debug=debug, trace=trace)
        found.append(c)
        rounds.append(r)
    predicted = _assemble(g.n, found)
    budget = _budget_or_none(g, k, beta, gamma, cap) if with_budget else None
    return predicted, _report(oracle, counts, predicted, budget, rounds, started)


def recover_clustering2(g: SemimetricGraph, radii: Sequence, beta, gamma, seeds: Sequence[int], oracle,
                        naive: bool = False, debug: bool = False, trace=None,
                        with_budget: bool = True, cap: int = BALL_CAP) -> tuple[Clustering, RecoveryReport]:
    """Recover clusters with individual radii, smallest radius first."""
    started = time.perf_counter()
    counts = _counts(oracle)
    radii = [as_fraction(r) for r in radii]
    k = len(seeds)
    if len(radii) != k:
        raise ValueError("need one radius per cluster")
    order = sorted(range(k), key=lambda i: (radii[i], i))
    remaining = set(range(g.n))
    found: list[frozenset[int]] = [frozenset()] * k
    rounds = [0] * k
    for pos, i in enumerate(order):
        if seeds[i] not in remaining:
            raise PartitionError(f"seed of cluster {i} was swallowed by an earlier cluster", (seeds[i],))
        tg = threshold(g, radii[i], remaining)
        star = tg.induced(connected_component(tg, seeds[i]))
        local: list = [None] * k
        local[i] = seeds[i]
        with _phase(oracle, "seed-discovery"):
            for j in order[pos + 1:]:
                local[j] = oracle.seed(star.nodes, j)
        c, r = recover_single_cluster(star, radii[i], beta, gamma, local, i, oracle,
                                      naive=naive, debug=debug, trace=trace)
        found[i] = c
        rounds[i] = r
        remaining -= c
    predicted = _assemble(g.n, found)
    budget = _budget_or_none(g, k, beta, gamma, cap) if with_budget else None
    return predicted, _report(oracle, counts, predicted, budget, rounds, started)
