"""Command-line entry point: ``scqcluster {gen,check,recover,learn-radii,bench}``.

Exit codes: 0 ok, 1 input error, 2 convexity violation, 3 recovery mismatch.
Errors are reported as one JSON object on stderr.  Reports are written with
sorted keys and carry no timings unless ``--with-time`` is given, so repeated
runs produce byte-identical files.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from . import io
from .convexity import check_convex, check_convex_generalized, min_radius, radius_report
from .errors import BallTooLarge, InstanceFormatError, RecoveryError, ScqClusterError
from .graphcore import format_fraction
from .instances import FAMILIES, generate
from .metrics import density_constant, pstar
from .oracles import POLICIES, OracleSession
from .paramsearch import recover_unknown_param
from .radii import get_epsilons
from .recovery import query_budget, recover_clustering, recover_clustering2

EXIT_OK, EXIT_INPUT, EXIT_VIOLATION, EXIT_MISMATCH = 0, 1, 2, 3
RECOVER_MODES = ("identical", "multi", "learn-radii", "guess-beta", "guess-gamma")
BENCH_COLUMNS = ("family", "n", "k", "beta", "gamma", "dens", "pstar_bg", "pstar_bg_2g",
                 "scq", "seed", "budget", "ok")


class InputError(Exception):
    """Malformed flags or files; mapped to exit code 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InputError(message)


def _emit(payload: dict, path=None) -> None:
    text = json.dumps(payload, sort_keys=True, indent=1) + "\n"
    if path is None or str(path) == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _error(kind: str, message: str) -> None:
    sys.stderr.write(json.dumps({"error": kind, "message": message}, sort_keys=True) + "\n")


def _parse_value(text: str):
    try:
        return int(text)
    except ValueError:
        return text


def parse_params(items) -> dict:
    """``key=value`` pairs; integers stay integers, everything else is a string
    (the generators parse rationals such as ``1/4`` exactly)."""
    out = {}
    for item in items or ():
        if "=" not in item:
            raise InputError(f"parameter {item!r} is not key=value")
        key, value = item.split("=", 1)
        out[key.strip().replace("-", "_")] = _parse_value(value.strip())
    return out


def _load(path):
    try:
        return io.load(path)
    except InstanceFormatError as exc:
        raise InputError(str(exc)) from exc


def _session(inst, args):
    script = [int(x) for x in args.script.split(",")] if getattr(args, "script", None) else None
    policy = args.seed_policy
    return OracleSession(inst.truth, policy, script)


# -- gen -------------------------------------------------------------------------

def cmd_gen(args) -> int:
    try:
        inst = generate(args.family, parse_params(args.params), args.rng_seed)
    except (TypeError, ValueError) as exc:
        raise InputError(str(exc)) from exc
    if args.out is None or args.out == "-":
        sys.stdout.write(io.dumps(inst))
    else:
        io.save(inst, args.out)
    return EXIT_OK


# -- check -----------------------------------------------------------------------

def cmd_check(args) -> int:
    inst = _load(args.instance)
    params = inst.params
    if args.generalized or not params.single:
        verdict = check_convex_generalized(inst.graph, inst.truth, params, budget=args.budget)
        kind = "generalized"
    else:
        verdict = check_convex(inst.graph, inst.truth, params, budget=args.budget)
        kind = "identical"
    payload = {
        "command": "check",
        "family": inst.family,
        "definition": kind,
        "n": inst.n,
        "k": inst.k,
        **verdict.to_dict(),
        "radii": radius_report(inst.graph, inst.truth, params),
    }
    _emit(payload, args.out)
    return EXIT_OK if verdict.ok else EXIT_VIOLATION


# -- recover ---------------------------------------------------------------------

def _diagnostics(inst, predicted) -> dict:
    """Where a predicted clustering disagrees with the truth."""
    truth = inst.truth
    mixed = []
    for c, members in enumerate(predicted.clusters()):
        labels = sorted({truth.labels[x] for x in members})
        if len(labels) > 1:
            mixed.append({"predicted": c, "true_labels": labels})
    split = [i for i, members in enumerate(truth.clusters())
             if len({predicted.labels[x] for x in members}) > 1]
    return {"mixed_predicted_clusters": mixed, "split_true_clusters": split}


def _exact(inst, predicted) -> bool:
    return predicted is not None and predicted.same_partition(inst.truth)


def _run_recovery(inst, args, oracle) -> dict:
    g, p, seeds = inst.graph, inst.params, inst.seeds
    common = {"naive": args.naive, "cap": inst.ball_cap}
    mode = args.mode
    if mode == "identical":
        if not p.single:
            raise InputError("identical mode needs an instance with a single radius")
        predicted, report = recover_clustering(g, p.eps, p.beta, p.gamma, seeds, oracle, **common)
        return {"predicted_obj": predicted, **report.to_dict(args.with_time)}
    if mode == "multi":
        radii = p.radius_vector(inst.k)
        predicted, report = recover_clustering2(g, radii, p.beta, p.gamma, seeds, oracle, **common)
        return {"predicted_obj": predicted, **report.to_dict(args.with_time), "radii": [str(r) for r in radii]}
    if mode == "learn-radii":
        learned = get_epsilons(g, inst.k, oracle)
        predicted, report = recover_clustering2(g, learned.radii, p.beta, p.gamma, seeds, oracle, **common)
        out = report.to_dict(args.with_time)
        out["scq"], out["seed"] = oracle.scq_count, oracle.seed_count
        out["radii"] = [str(r) for r in learned.radii]
        return {"predicted_obj": predicted, **out}
    unknown = "beta" if mode == "guess-beta" else "gamma"
    known = p.gamma if unknown == "beta" else p.beta
    base = args.base or ("identical" if p.single else "multi")
    kwargs = {"eps": p.eps} if base == "identical" and p.single else {}
    if base == "identical" and not p.single:
        raise InputError("identical base mode needs an instance with a single radius")
    if base == "multi":
        kwargs = {"radii": p.radius_vector(inst.k)}
    guess = recover_unknown_param(g, unknown, known, seeds, oracle, mode=base,
                                  paranoid=not args.fast_equality, naive=args.naive, **kwargs)
    out = guess.to_dict()
    out["base_mode"] = base
    out["phases"] = oracle.phase_breakdown()
    try:
        out["budget"] = query_budget(g, inst.k, p.beta, p.gamma, inst.ball_cap)
    except BallTooLarge:
        out["budget"] = None
    return {"predicted_obj": guess.predicted, **out}


def cmd_recover(args) -> int:
    inst = _load(args.instance)
    try:
        oracle = _session(inst, args)
    except ScqClusterError as exc:
        raise InputError(str(exc)) from exc
    payload = {
        "command": "recover",
        "family": inst.family,
        "mode": args.mode,
        "seed_policy": args.seed_policy,
        "n": inst.n,
        "k": inst.k,
    }
    try:
        result = _run_recovery(inst, args, oracle)
    except RecoveryError as exc:
        payload.update({
            "exact": False,
            "scq": oracle.scq_count,
            "seed": oracle.seed_count,
            "diagnostics": {"error": type(exc).__name__, "message": str(exc), "nodes": exc.nodes},
        })
        _emit(payload, args.report)
        return EXIT_MISMATCH
    predicted = result.pop("predicted_obj")
    payload.update(result)
    payload["exact"] = _exact(inst, predicted)
    if not payload["exact"]:
        payload["diagnostics"] = _diagnostics(inst, predicted) if predicted is not None else {}
    _emit(payload, args.report)
    return EXIT_OK if payload["exact"] else EXIT_MISMATCH


# -- learn-radii -----------------------------------------------------------------

def cmd_learn_radii(args) -> int:
    inst = _load(args.instance)
    try:
        oracle = _session(inst, args)
    except ScqClusterError as exc:
        raise InputError(str(exc)) from exc
    report = get_epsilons(inst.graph, inst.k, oracle)
    truth = [min_radius(inst.graph, c) for c in inst.truth.clusters()]
    payload = {
        "command": "learn-radii",
        "family": inst.family,
        "seed_policy": args.seed_policy,
        "n": inst.n,
        "k": inst.k,
        **report.to_dict(),
        "min_radius": [str(r) for r in truth],
        "matches_min_radius": list(report.radii) == truth,
    }
    _emit(payload, args.report)
    return EXIT_OK


# -- bench -----------------------------------------------------------------------

def _suite_entries(path) -> list[dict]:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read suite {path}: {exc}") from exc
    entries = data.get("entries") if isinstance(data, dict) else data
    if not isinstance(entries, list) or not all(isinstance(e, dict) and "family" in e for e in entries):
        raise InputError("suite must be a list of objects with a 'family' key (or {'entries': [...]})")
    return entries


def bench_row(entry: dict) -> dict:
    inst = generate(entry["family"], entry.get("params", {}), int(entry.get("rng_seed", 0)))
    g, p, cap = inst.graph, inst.params, inst.ball_cap
    mode = entry.get("mode", "identical" if p.single else "multi")
    oracle = OracleSession(inst.truth, entry.get("seed_policy", "first-by-id"))
    row = {"family": inst.family, "n": inst.n, "k": inst.k,
           "beta": format_fraction(p.beta), "gamma": format_fraction(p.gamma)}
    try:
        row["dens"] = f"{density_constant(g, cap).dens:.6f}"
        row["pstar_bg"] = pstar(g, p.beta * p.gamma, cap)
        row["pstar_bg_2g"] = pstar(g, p.beta * p.gamma / (2 + p.gamma), cap)
    except BallTooLarge:
        row.update(dens="", pstar_bg="", pstar_bg_2g="")
    predicted, budget = None, None
    try:
        if mode == "identical":
            predicted, report = recover_clustering(g, p.eps, p.beta, p.gamma, inst.seeds, oracle, cap=cap)
        else:
            radii = p.radius_vector(inst.k) if mode == "multi" else get_epsilons(g, inst.k, oracle).radii
            predicted, report = recover_clustering2(g, radii, p.beta, p.gamma, inst.seeds, oracle, cap=cap)
        budget = report.budget
    except RecoveryError:
        pass
    exact = predicted is not None and predicted.same_partition(inst.truth)
    within = budget is None or oracle.scq_count <= budget
    row.update(scq=oracle.scq_count, seed=oracle.seed_count,
               budget="" if budget is None else budget, ok=exact and within)
    return row


def cmd_bench(args) -> int:
    entries = _suite_entries(args.suite)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    try:
        rows = [bench_row(e) for e in entries]
    except (TypeError, ValueError) as exc:
        raise InputError(str(exc)) from exc
    with open(out_dir / "bench.csv", "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=BENCH_COLUMNS, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
    return EXIT_OK if all(r["ok"] for r in rows) else EXIT_MISMATCH


# -- wiring ----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="scqcluster", description="Recover convex clusterings from simulated same-cluster and seed queries.",
                     epilog="exit codes: 0 ok, 1 input error, 2 convexity violation, 3 recovery mismatch")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate an instance file")
    p.add_argument("--family", required=True, choices=sorted(FAMILIES))
    p.add_argument("--params", nargs="*", default=[], metavar="KEY=VALUE")
    p.add_argument("--rng-seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("check", help="brute-force convexity verdict")
    p.add_argument("--instance", required=True)
    p.add_argument("--generalized", action="store_true", help="per-cluster radii, hereditary geodesic check")
    p.add_argument("--budget", type=int, default=10**7, help="path-expansion cap")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_check)

    def oracle_flags(p):
        p.add_argument("--seed-policy", default="first-by-id", choices=POLICIES)
        p.add_argument("--script", default=None, help="comma-separated node ids for the scripted policy")

    p = sub.add_parser("recover", help="recover the clustering with simulated queries")
    p.add_argument("--instance", required=True)
    p.add_argument("--mode", required=True, choices=RECOVER_MODES)
    oracle_flags(p)
    p.add_argument("--base", choices=("identical", "multi", "learn-radii"), default=None,
                   help="base recoverer for the guess modes")
    p.add_argument("--paranoid-equality", action="store_true",
                   help="2k SEED equality check (already the default; kept for explicitness)")
    p.add_argument("--fast-equality", action="store_true", help="k SEED equality check")
    p.add_argument("--naive", action="store_true", help="non-amortized seed discovery")
    p.add_argument("--with-time", action="store_true", help="include wall time (breaks byte-identity)")
    p.add_argument("--report", default=None)
    p.set_defaults(func=cmd_recover)

    p = sub.add_parser("learn-radii", help="learn per-cluster radii with SEED queries")
    p.add_argument("--instance", required=True)
    oracle_flags(p)
    p.add_argument("--report", default=None)
    p.set_defaults(func=cmd_learn_radii)

    p = sub.add_parser("bench", help="run a suite and write bench.csv")
    p.add_argument("--suite", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except InputError as exc:
        _error("usage", str(exc))
        return EXIT_INPUT
    except SystemExit as exc:  # --help
        return EXIT_OK if exc.code in (0, None) else EXIT_INPUT
    if getattr(args, "paranoid_equality", False) and getattr(args, "fast_equality", False):
        _error("usage", "--paranoid-equality and --fast-equality are exclusive")
        return EXIT_INPUT
    try:
        return args.func(args)
    except InputError as exc:
        _error("input", str(exc))
        return EXIT_INPUT
    except ScqClusterError as exc:
        _error(type(exc).__name__, str(exc))
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
