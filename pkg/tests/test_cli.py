import csv
import json
import shutil
import subprocess

import pytest

from scqcluster.cli import BENCH_COLUMNS, main, parse_params, InputError


def run(*argv):
    return main([str(a) for a in argv])


@pytest.fixture
def whirl_file(tmp_path):
    path = tmp_path / "whirl.json"
    assert run("gen", "--family", "whirl", "--params", "n=40", "--rng-seed", 0, "--out", path) == 0
    return path


def test_parse_params():
    assert parse_params(["n=40", "beta=1/4", "ratio = 3/2"]) == {"n": 40, "beta": "1/4", "ratio": "3/2"}
    with pytest.raises(InputError):
        parse_params(["n"])


def test_gen_then_recover_identical(whirl_file, tmp_path):
    report = tmp_path / "r.json"
    assert run("recover", "--instance", whirl_file, "--mode", "identical", "--report", report) == 0
    data = json.loads(report.read_text())
    assert data["exact"] is True
    assert data["scq"] <= data["budget"]
    assert "elapsed" not in data


def test_check_exit_codes(whirl_file, tmp_path, capsys):
    assert run("check", "--instance", whirl_file) == 0
    assert json.loads(capsys.readouterr().out)["ok"] is True
    bad = tmp_path / "vg.json"
    run("gen", "--family", "violate-geodesic", "--out", bad)
    out = tmp_path / "verdict.json"
    assert run("check", "--instance", bad, "--out", out) == 2
    verdict = json.loads(out.read_text())
    assert {v["property"] for v in verdict["violations"]} == {"geodesic"}
    assert run("check", "--instance", whirl_file, "--generalized") == 0


def test_recover_violate_geodesic_flags_mismatch(tmp_path):
    inst = tmp_path / "vg.json"
    run("gen", "--family", "violate-geodesic", "--out", inst)
    report = tmp_path / "r.json"
    assert run("recover", "--instance", inst, "--mode", "identical", "--report", report) == 3
    data = json.loads(report.read_text())
    assert data["exact"] is False and data["diagnostics"]


def test_learn_radii_on_radii_path(tmp_path):
    inst = tmp_path / "rp.json"
    run("gen", "--family", "radii-path", "--params", "n=64", "k=2", "--rng-seed", 7, "--out", inst)
    report = tmp_path / "radii.json"
    assert run("learn-radii", "--instance", inst, "--seed-policy", "adversarial-minmax", "--report", report) == 0
    data = json.loads(report.read_text())
    record = json.loads(inst.read_text())["construction_record"]
    assert data["radii"] == record["radii"]
    assert data["matches_min_radius"] is True


@pytest.mark.parametrize("mode", ["multi", "learn-radii", "guess-beta", "guess-gamma"])
def test_other_modes(mode, tmp_path):
    inst = tmp_path / "oort.json"
    run("gen", "--family", "oort", "--params", "ring=24", "--out", inst)
    report = tmp_path / "r.json"
    assert run("recover", "--instance", inst, "--mode", mode, "--report", report) == 0
    assert json.loads(report.read_text())["exact"] is True


def test_guess_with_fast_equality(whirl_file, tmp_path):
    slow, fast = tmp_path / "slow.json", tmp_path / "fast.json"
    assert run("recover", "--instance", whirl_file, "--mode", "guess-beta", "--paranoid-equality",
               "--report", slow) == 0
    assert run("recover", "--instance", whirl_file, "--mode", "guess-beta", "--fast-equality", "--report", fast) == 0
    s, f = json.loads(slow.read_text()), json.loads(fast.read_text())
    assert s["phases"]["equality"]["seed"] == 2 * f["phases"]["equality"]["seed"]
    assert run("recover", "--instance", whirl_file, "--mode", "guess-beta", "--paranoid-equality",
               "--fast-equality") == 1


def test_identical_mode_needs_single_radius(tmp_path, capsys):
    inst = tmp_path / "oort.json"
    run("gen", "--family", "oort", "--params", "ring=24", "--out", inst)
    assert run("recover", "--instance", inst, "--mode", "identical") == 1
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "input"


def test_input_errors(tmp_path, capsys):
    assert run("recover", "--instance", tmp_path / "missing.json", "--mode", "identical") == 1
    assert "error" in json.loads(capsys.readouterr().err)
    assert run("gen", "--family", "whirl", "--params", "n") == 1
    assert run("gen", "--family", "caterpillar", "--params", "n=31") == 1
    assert run("gen", "--family", "whirl", "--params", "bogus=1") == 1
    capsys.readouterr()
    assert run("frobnicate") == 1
    assert json.loads(capsys.readouterr().err)["error"] == "usage"
    bad = tmp_path / "bad.json"
    bad.write_text("{}")
    assert run("check", "--instance", bad) == 1


def test_adversarial_policy_needs_k2(tmp_path):
    inst = tmp_path / "rc.json"
    run("gen", "--family", "random-convex", "--params", "n=30", "k=3", "--out", inst)
    assert run("recover", "--instance", inst, "--mode", "identical", "--seed-policy", "adversarial-minmax") == 1
    assert run("recover", "--instance", inst, "--mode", "identical", "--seed-policy", "scripted",
               "--script", "5,4,3") == 0


def test_bench(tmp_path):
    suite = tmp_path / "suite.json"
    suite.write_text(json.dumps([
        {"family": "whirl", "params": {"n": 40}},
        {"family": "random-two-scale", "params": {"n": 40, "k": 3}, "rng_seed": 2},
        {"family": "radii-path", "params": {"n": 32, "k": 2}, "mode": "learn-radii"},
    ]))
    out = tmp_path / "bench"
    assert run("bench", "--suite", suite, "--out", out) == 0
    with open(out / "bench.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert tuple(rows[0].keys()) == BENCH_COLUMNS
    assert [r["ok"] for r in rows] == ["True"] * 3
    first = (out / "bench.csv").read_bytes()
    run("bench", "--suite", suite, "--out", out)
    assert (out / "bench.csv").read_bytes() == first


def test_bench_flags_failures(tmp_path):
    suite = tmp_path / "suite.json"
    suite.write_text(json.dumps({"entries": [{"family": "violate-geodesic"}]}))
    assert run("bench", "--suite", suite, "--out", tmp_path / "b") == 3
    suite.write_text(json.dumps([{"nofamily": 1}]))
    assert run("bench", "--suite", suite, "--out", tmp_path / "b") == 1


@pytest.mark.skipif(shutil.which("scqcluster") is None, reason="console script not installed")
def test_console_script(tmp_path):
    out = tmp_path / "w.json"
    proc = subprocess.run(["scqcluster", "gen", "--family", "whirl", "--out", str(out)], capture_output=True)
    assert proc.returncode == 0 and out.exists()
    proc = subprocess.run(["scqcluster", "recover", "--instance", str(tmp_path / "nope.json"), "--mode", "identical"],
                          capture_output=True, text=True)
    assert proc.returncode == 1
    assert json.loads(proc.stderr)["error"] == "input"
