"""Versioned JSON instance files.  Rationals travel as "p/q" strings."""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path

from .convexity import ConvexityParams
from .errors import InstanceFormatError, NotAPartition
from .graphcore import SemimetricGraph, format_fraction
from .instances import Instance
from .metrics import BALL_CAP
from .oracles import Clustering

FORMAT_VERSION = 1


def _plain(obj):
    """Make construction records JSON friendly (tuples, Fractions, sets)."""
    if isinstance(obj, Fraction):
        return format_fraction(obj)
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (set, frozenset)):
        return sorted(_plain(v) for v in obj)
    return obj


def instance_to_dict(inst: Instance) -> dict:
    p = inst.params
    radii = format_fraction(p.radii) if p.single else [format_fraction(r) for r in p.radii]
    return {
        "format_version": FORMAT_VERSION,
        "family": inst.family,
        "tag": inst.tag,
        "n": inst.graph.n,
        "k": inst.truth.k,
        "edges": [[u, v, format_fraction(w)] for u, v, w in inst.graph.edges],
        "labels": list(inst.truth.labels),
        "seeds": list(inst.seeds),
        "params": {"beta": format_fraction(p.beta), "gamma": format_fraction(p.gamma), "radii": radii},
        "ball_cap": inst.ball_cap,
        "construction_record": _plain(inst.record),
    }


def dumps(inst: Instance) -> str:
    return json.dumps(instance_to_dict(inst), sort_keys=True, indent=1) + "\n"


def save(inst: Instance, path) -> None:
    Path(path).write_text(dumps(inst))


def instance_from_dict(data: dict) -> Instance:
    try:
        if data.get("format_version") != FORMAT_VERSION:
            raise InstanceFormatError(f"unsupported format_version {data.get('format_version')!r}")
        n = int(data["n"])
        k = int(data["k"])
        graph = SemimetricGraph(n, ((int(u), int(v), Fraction(str(w))) for u, v, w in data["edges"]))
        labels = [int(x) for x in data["labels"]]
        if len(labels) != n:
            raise InstanceFormatError("labels must have one entry per node")
        truth = Clustering(tuple(labels), k)
        seeds = tuple(int(s) for s in data["seeds"])
        if len(seeds) != k or any(truth.labels[s] != i for i, s in enumerate(seeds)):
            raise InstanceFormatError("seeds must list one member of each cluster, in cluster order")
        raw = data["params"]
        radii = raw["radii"]
        radii = tuple(Fraction(str(r)) for r in radii) if isinstance(radii, list) else Fraction(str(radii))
        params = ConvexityParams(Fraction(str(raw["beta"])), Fraction(str(raw["gamma"])), radii)
        if not params.single and len(params.radii) != k:
            raise InstanceFormatError("radius vector length must equal k")
    except InstanceFormatError:
        raise
    except (KeyError, TypeError, ValueError, IndexError, ZeroDivisionError, NotAPartition) as exc:
        raise InstanceFormatError(f"malformed instance: {exc}") from exc
    return Instance(graph, truth, params, seeds, str(data.get("family", "custom")),
                    dict(data.get("construction_record", {})), str(data.get("tag", "convex")),
                    int(data.get("ball_cap", BALL_CAP)))


def load(path) -> Instance:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InstanceFormatError(f"cannot read instance {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise InstanceFormatError("instance file must hold a JSON object")
    return instance_from_dict(data)
