"""Simulated same-cluster (SCQ) and seed (SEED) oracles.

Algorithms only ever see an :class:`OracleSession` through its ``scq``,
``seed`` and ``k`` members; the ground truth lives in a private attribute.
"""

from __future__ import annotations

from collections import Counter
from contextlib import contextmanager
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import InvalidPolicy, NotAPartition

POLICIES = ("first-by-id", "adversarial-minmax", "scripted")


@dataclass(frozen=True)
class Clustering:
    labels: tuple[int, ...]
    k: int

    def __post_init__(self):
        labels = tuple(int(c) for c in self.labels)
        object.__setattr__(self, "labels", labels)
        if any(not 0 <= c < self.k for c in labels):
            raise NotAPartition(f"labels must lie in 0..{self.k - 1}")
        if len(set(labels)) != self.k:
            raise NotAPartition("every cluster id must be used")

    @classmethod
    def from_sets(cls, n: int, sets: Sequence[Iterable[int]]) -> "Clustering":
        labels = [-1] * n
        for i, members in enumerate(sets):
            for x in members:
                if labels[x] != -1:
                    raise NotAPartition(f"node {x} assigned twice")
                labels[x] = i
        if -1 in labels:
            raise NotAPartition(f"node {labels.index(-1)} unassigned")
        return cls(tuple(labels), len(sets))

    @property
    def n(self) -> int:
        return len(self.labels)

    def cluster(self, i: int) -> frozenset[int]:
        return frozenset(x for x, c in enumerate(self.labels) if c == i)

    def clusters(self) -> list[frozenset[int]]:
        out = [set() for _ in range(self.k)]
        for x, c in enumerate(self.labels):
            out[c].add(x)
        return [frozenset(s) for s in out]

    def label_of(self, x: int) -> int:
        return self.labels[x]

    def as_partition(self) -> frozenset[frozenset[int]]:
        return frozenset(self.clusters())

    def same_partition(self, other: "Clustering") -> bool:
        return self.as_partition() == other.as_partition()


class OracleSession:
    """Answers SCQ/SEED against a hidden clustering and counts every call.

    ``policy`` picks which member SEED returns: ``first-by-id`` (minimum id),
    ``adversarial-minmax`` (min for cluster 0, max for cluster 1, k == 2 only)
    or ``scripted`` (first node of ``script`` found in the answer set, falling
    back to the minimum id).
    """

    def __init__(self, truth: Clustering, policy: str = "first-by-id", script: Sequence[int] | None = None):
        if policy not in POLICIES:
            raise InvalidPolicy(f"unknown seed policy {policy!r}")
        if policy == "adversarial-minmax" and truth.k != 2:
            raise InvalidPolicy("adversarial-minmax is only defined for k = 2")
        if policy == "scripted" and script is None:
            raise InvalidPolicy("scripted policy needs a script")
        self._truth = truth
        self.policy = policy
        self._script = tuple(script) if script is not None else ()
        self.scq_count = 0
        self.seed_count = 0
        self.phase_counts: Counter = Counter()
        self._phase = "other"
        self._counting = True

    @property
    def k(self) -> int:
        return self._truth.k

    @property
    def n(self) -> int:
        return self._truth.n

    @contextmanager
    def phase(self, name: str):
        previous, self._phase = self._phase, name
        try:
            yield
        finally:
            self._phase = previous

    @contextmanager
    def uncounted(self):
        previous, self._counting = self._counting, False
        try:
            yield
        finally:
            self._counting = previous

    def _tick(self, kind: str):
        if not self._counting:
            return
        if kind == "scq":
            self.scq_count += 1
        else:
            self.seed_count += 1
        self.phase_counts[(self._phase, kind)] += 1

    def scq(self, x: int, y: int) -> bool:
        labels = self._truth.labels
        if not (0 <= x < len(labels) and 0 <= y < len(labels)):
            raise ValueError(f"invalid nodes ({x}, {y})")
        self._tick("scq")
        return labels[x] == labels[y]

    def seed(self, s: Iterable[int], i: int):
        """A member of C_i inside ``s`` chosen by the policy, or ``None``."""
        if not 0 <= i < self._truth.k:
            raise ValueError(f"cluster id {i} out of range")
        self._tick("seed")
        labels = self._truth.labels
        hits = [x for x in s if labels[x] == i]
        if not hits:
            return None
        if self.policy == "adversarial-minmax":
            return min(hits) if i == 0 else max(hits)
        if self.policy == "scripted":
            hit_set = set(hits)
            for x in self._script:
                if x in hit_set:
                    return x
        return min(hits)

    def phase_breakdown(self) -> dict[str, dict[str, int]]:
        out: dict[str, dict[str, int]] = {}
        for (phase, kind), count in sorted(self.phase_counts.items()):
            out.setdefault(phase, {})[kind] = count
        return out


class MemoizingOracle:
    """Wraps a session and answers repeated SCQ pairs from a cache.

    Not used by the acceptance runs: measured counts there must reflect every
    query the algorithms issue.
    """

    def __init__(self, session: OracleSession):
        self.session = session
        self._cache: dict[tuple[int, int], bool] = {}

    def __getattr__(self, name):
        return getattr(self.session, name)

    def scq(self, x: int, y: int) -> bool:
        key = (x, y) if x <= y else (y, x)
        if key not in self._cache:
            self._cache[key] = self.session.scq(x, y)
        return self._cache[key]

    def seed(self, s, i):
        return self.session.seed(s, i)
