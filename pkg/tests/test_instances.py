import random
from fractions import Fraction

import pytest

from scqcluster.convexity import CONNECTIVITY, GEODESIC, MARGIN, min_radius
from scqcluster.errors import RejectionExhausted
from scqcluster.instances import (
    FAMILIES,
    caterpillar,
    euclid,
    expected_probe_cost,
    generate,
    probe_hidden_point,
    radii_path,
)
from scqcluster.oracles import OracleSession
from scqcluster import instances

SMALL = {
    "whirl": {"n": 30},
    "oort": {"ring": 24},
    "violate-connectivity": {},
    "violate-margin": {},
    "violate-geodesic": {},
    "caterpillar": {"n": 21},
    "complete-random": {"n": 16},
    "radii-path": {"n": 32, "k": 4},
    "random-convex": {"n": 40, "k": 3},
    "random-two-scale": {"n": 40, "k": 3},
}


def test_every_family_has_small_params():
    assert set(SMALL) == set(FAMILIES)


@pytest.mark.parametrize("family", sorted(FAMILIES))
def test_generation_is_deterministic(family):
    a = generate(family, SMALL[family], rng_seed=4)
    b = generate(family, SMALL[family], rng_seed=4)
    assert a.graph == b.graph and a.truth == b.truth and a.seeds == b.seeds and a.record == b.record


@pytest.mark.parametrize("family", sorted(FAMILIES))
def test_tags_match_checker(family):
    inst = generate(family, SMALL[family], rng_seed=2)
    verdict = inst.check()
    if inst.tag == "convex":
        assert verdict.ok
    else:
        assert verdict.properties() == {inst.tag}
    for i, s in enumerate(inst.seeds):
        assert inst.truth.labels[s] == i


def test_violating_tags():
    assert generate("violate-connectivity").tag == CONNECTIVITY
    assert generate("violate-margin").tag == MARGIN
    assert generate("violate-geodesic").tag == GEODESIC


def test_unknown_family():
    with pytest.raises(ValueError):
        generate("nope")


@pytest.mark.parametrize("family,params", [
    ("caterpillar", {"n": 31}),
    ("radii-path", {"k": 3}),
    ("violate-connectivity", {"groups": 2}),
    ("violate-geodesic", {"n": 4}),
    ("complete-random", {"n": 1}),
])
def test_parameter_validation(family, params):
    with pytest.raises(ValueError):
        generate(family, params)


def test_euclid_rounds_up():
    assert euclid((0, 0), (3000, 4000)) == 5
    d = euclid((0, 0), (1000, 1000))
    assert d * d >= 2 and d - Fraction(1, 10**6) < Fraction(1414214, 10**6)


def test_radii_path_cut_points_are_recorded():
    inst = radii_path(n=64, k=4, rng_seed=3)
    starts = [0, inst.record["path_sizes"][0]]
    for h, j in enumerate(inst.record["j_star"]):
        first = starts[h]
        cluster = inst.truth.cluster(2 * h)
        assert cluster == frozenset(range(first, first + j))
        assert min_radius(inst.graph, cluster) == inst.graph.weight(first + j - 2, first + j - 1)
        assert Fraction(inst.record["radii"][2 * h]) == min_radius(inst.graph, cluster)


def test_caterpillar_layout():
    inst = caterpillar(n=30, rng_seed=1)
    assert len(inst.record["up"]) == 10
    assert inst.truth.cluster(1) == {inst.record["hidden"]}
    assert inst.seeds == (0, inst.record["hidden"])


@pytest.mark.parametrize("adaptive", [False, True])
def test_probe_finds_the_hidden_point(adaptive):
    for seed in range(10):
        inst = caterpillar(n=24, rng_seed=seed)
        o = OracleSession(inst.truth)
        found, used = probe_hidden_point(inst, o, adaptive=adaptive)
        assert found == inst.record["hidden"]
        assert used == o.scq_count <= len(inst.record["up"]) - 1


def test_expected_probe_cost():
    assert expected_probe_cost(10) == 9
    # adaptive: positions 1..9 cost their index, the last costs 9
    assert expected_probe_cost(10, adaptive=True) == Fraction(sum(range(1, 10)) + 9, 10)


def test_rejection_exhausted():
    inst = generate("violate-margin")
    with pytest.raises(RejectionExhausted):
        instances._certified(lambda rng: inst, rng_seed=0, attempts=3)


def test_random_convex_records_attempts():
    inst = generate("random-convex", {"n": 30, "k": 2}, rng_seed=random.Random(0).randrange(100))
    assert 1 <= inst.record["attempts"] <= 100
    assert sorted(inst.record["permutation"]) == list(range(30))
