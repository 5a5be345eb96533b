"""Recovery when one of beta, gamma is unknown: halve the guess until the
recovered clustering passes a query-based equality check."""

from __future__ import annotations

from contextlib import nullcontext
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .errors import GuessUnderflow, NotAPartition, ScqClusterError
from .graphcore import SemimetricGraph, as_fraction
from .oracles import Clustering
from .radii import get_epsilons
from .recovery import recover_clustering, recover_clustering2

MIN_GUESS = Fraction(1, 2**64)
MODES = ("identical", "multi", "learn-radii")


def _phase(oracle, name):
    enter = getattr(oracle, "phase", None)
    return enter(name) if enter is not None else nullcontext()


def clustering_matches_truth(candidate: Clustering, oracle, seeds: Sequence[int], paranoid: bool = True) -> bool:
    """Decide candidate == truth with SCQ against the seeds plus SEED queries.

    For each candidate cluster the label of its smallest node is found by
    comparing it with the seeds in order (at most k SCQ), then
    SEED(X minus that cluster, label) must come back empty.  With a candidate
    of exactly k clusters this one direction is enough: every candidate cluster
    then contains a whole true cluster with a distinct label, and sizes force
    equality.  ``paranoid`` (the default) adds the mirror check SEED(X minus
    the cluster holding s_i, i) for every true label i, i.e. 2k SEED queries;
    ``paranoid=False`` issues only the first k.
    """
    if not isinstance(candidate, Clustering):
        raise NotAPartition("candidate must be a Clustering")
    k = oracle.k
    if len(seeds) != k:
        raise ValueError("need one seed per true cluster")
    everything = frozenset(range(candidate.n))
    with _phase(oracle, "equality"):
        if candidate.k != k and not paranoid:
            return False
        same = True
        for members in candidate.clusters():
            x = min(members)
            label = None
            for i, s in enumerate(seeds):
                if oracle.scq(x, s):
                    label = i
                    break
            if label is None:
                return False
            if oracle.seed(everything - members, label) is not None:
                same = False
                if not paranoid:
                    return False
        if paranoid:
            for i, s in enumerate(seeds):
                home = candidate.cluster(candidate.label_of(s))
                if oracle.seed(everything - home, i) is not None:
                    same = False
            same = same and candidate.k == k
        return same


@dataclass
class GuessReport:
    predicted: Clustering | None
    rounds: int
    final_guess: Fraction
    scq_used: int
    seed_used: int
    failures: list[str] = field(default_factory=list)
    radii: tuple | None = None

    def to_dict(self) -> dict:
        return {
            "predicted": list(self.predicted.labels) if self.predicted is not None else None,
            "rounds": self.rounds,
            "final_guess": str(self.final_guess),
            "scq": self.scq_used,
            "seed": self.seed_used,
            "failures": self.failures,
            "radii": [str(r) for r in self.radii] if self.radii is not None else None,
        }


def recover_unknown_param(g: SemimetricGraph, unknown: str, known, seeds: Sequence[int], oracle,
                          mode: str = "identical", eps=None, radii=None,
                          paranoid: bool = True, naive: bool = False) -> GuessReport:
    """Guess 1, 1/2, 1/4, ... for the unknown parameter ("beta" or "gamma").

    ``mode`` selects the base recoverer: one shared radius ``eps``, a radius
    vector ``radii``, or radii learned first with seed queries.  Failed rounds
    (including recoveries that break their own contracts) count as a mismatch.
    """
    if unknown not in ("beta", "gamma"):
        raise ValueError("unknown must be 'beta' or 'gamma'")
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    known = as_fraction(known)
    scq0, seed0 = oracle.scq_count, oracle.seed_count
    learned = None
    if mode == "learn-radii":
        learned = get_epsilons(g, len(seeds), oracle).radii
        radii = learned
    elif mode == "identical" and eps is None:
        raise ValueError("identical mode needs eps")
    elif mode == "multi" and radii is None:
        raise ValueError("multi mode needs radii")

    guess = Fraction(1)
    rounds = 0
    failures = []
    while True:
        if guess < MIN_GUESS:
            raise GuessUnderflow(f"no guess down to {MIN_GUESS} produced the true clustering")
        rounds += 1
        beta, gamma = (guess, known) if unknown == "beta" else (known, guess)
        candidate = None
        try:
            with _phase(oracle, "recovery"):
                if mode == "identical":
                    candidate, _ = recover_clustering(g, eps, beta, gamma, seeds, oracle, naive=naive,
                                                      with_budget=False)
                else:
                    candidate, _ = recover_clustering2(g, radii, beta, gamma, seeds, oracle, naive=naive,
                                                       with_budget=False)
        except ScqClusterError as exc:
            failures.append(f"{guess}: {type(exc).__name__}")
        if candidate is not None and clustering_matches_truth(candidate, oracle, seeds, paranoid):
            return GuessReport(candidate, rounds, guess, oracle.scq_count - scq0,
                               oracle.seed_count - seed0, failures, learned)
        guess /= 2
