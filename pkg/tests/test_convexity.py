import random
from dataclasses import replace
from fractions import Fraction

import pytest

from conftest import brute_convex, brute_geodesic_ok, brute_min_radius, random_graph, random_partition
from scqcluster.convexity import (
    CONNECTIVITY,
    GEODESIC,
    MARGIN,
    ConvexityParams,
    check_convex,
    check_convex_generalized,
    cluster_radii,
    geodesic_witness,
    min_connecting_radius,
    min_radius,
    radius_report,
    replay,
)
from scqcluster.errors import Disconnected, TooLarge
from scqcluster.graphcore import SemimetricGraph, threshold
from scqcluster.instances import generate, random_convex, violate_connectivity, violate_geodesic, violate_margin
from scqcluster.oracles import Clustering


def test_params_validation():
    with pytest.raises(ValueError):
        ConvexityParams(0, "1/2", 1)
    with pytest.raises(ValueError):
        ConvexityParams("1/2", "3/2", 1)
    with pytest.raises(ValueError):
        ConvexityParams("1/2", "1/2", 0)
    with pytest.raises(ValueError):
        ConvexityParams("1/2", "1/2", ())
    p = ConvexityParams("1/2", "1/4", ["1", "2"])
    assert not p.single and p.radius(1) == 2
    with pytest.raises(ValueError):
        p.eps
    assert ConvexityParams(1, 1, 3).radius_vector(2) == (3, 3)


def test_k1_is_always_convex():
    g = SemimetricGraph(4, [(0, 1, 1), (1, 2, 1), (2, 3, 1), (0, 3, 1)])
    truth = Clustering((0, 0, 0, 0), 1)
    for beta in ("1/4", "1"):
        for gamma in ("1/10", "1"):
            assert check_convex(g, truth, ConvexityParams(beta, gamma, 1)).ok


def test_hexagon_geodesic_violation_frozen():
    # cycle 0..5; cluster {0,1,2,3} plus foreign {4,5}: the path 0-5-4-3 has
    # length 3 = d(0,3), so any gamma breaks convexity; cross edges weigh
    # 1 > beta*eps, so the margin holds
    g = SemimetricGraph(6, [(i, (i + 1) % 6, 1) for i in range(6)])
    truth = Clustering((0, 0, 0, 0, 1, 1), 2)
    v = check_convex(g, truth, ConvexityParams("1/2", "1/10", 1))
    assert v.properties() == {GEODESIC}
    geo = [x for x in v.violations if x.prop == GEODESIC][0]
    assert geo.cluster == 0
    assert replay(g, truth, ConvexityParams("1/2", "1/10", 1), geo)


@pytest.mark.parametrize("seed", range(40))
def test_check_convex_matches_brute_force(seed):
    rng = random.Random(seed)
    n = rng.randint(2, 8)
    g = random_graph(rng, n, p=0.6, weights=(1, 2, 3))
    truth = random_partition(rng, n, rng.randint(1, min(3, n)))
    for eps in g.distinct_weights()[:3]:
        for beta, gamma in ((Fraction(1, 2), Fraction(1, 2)), (Fraction(1, 4), Fraction(1))):
            params = ConvexityParams(beta, gamma, eps)
            verdict = check_convex(g, truth, params)
            expect = brute_convex(g, truth, beta, gamma, eps)
            assert {p for p, ok in expect.items() if not ok} == verdict.properties()
            for v in verdict.violations:
                assert replay(g, truth, params, v)


@pytest.mark.parametrize("seed", range(25))
def test_generalized_matches_hereditary_brute_force(seed):
    rng = random.Random(1000 + seed)
    n = rng.randint(3, 8)
    g = random_graph(rng, n, p=0.6, weights=(1, 2, 3, 4))
    truth = random_partition(rng, n, 2)
    radii = tuple(rng.choice(g.distinct_weights()) for _ in range(2))
    gamma = Fraction(1, 2)
    params = ConvexityParams(Fraction(1, 2), gamma, radii)
    verdict = check_convex_generalized(g, truth, params)
    geo_bad = set()
    for i, members in enumerate(truth.clusters()):
        for level in g.distinct_weights():
            if level <= radii[i] and not brute_geodesic_ok(g, members, level, gamma):
                geo_bad.add(i)
    assert {v.cluster for v in verdict.violations if v.prop == GEODESIC} == geo_bad
    for v in verdict.violations:
        assert replay(g, truth, params, v)


@pytest.mark.parametrize("seed", range(20))
def test_generalized_constant_vector_at_least_as_strict(seed):
    rng = random.Random(2000 + seed)
    n = rng.randint(3, 10)
    g = random_graph(rng, n, p=0.5)
    truth = random_partition(rng, n, 2)
    eps = rng.choice(g.distinct_weights())
    single = check_convex(g, truth, ConvexityParams("1/2", "1/2", eps))
    vector = check_convex_generalized(g, truth, ConvexityParams("1/2", "1/2", (eps, eps)))
    for prop in (CONNECTIVITY, MARGIN, GEODESIC):
        if prop in single.properties():
            assert prop in vector.properties()


def test_violating_generators_fail_exactly_their_property():
    cases = [(violate_connectivity(), CONNECTIVITY), (violate_margin(), MARGIN), (violate_geodesic(), GEODESIC)]
    for inst, prop in cases:
        verdict = inst.check()
        assert verdict.properties() == {prop}
        for v in verdict.violations:
            assert replay(inst.graph, inst.truth, inst.params, v)


def test_replay_rejects_forged_witnesses():
    inst = violate_geodesic()
    verdict = inst.check()
    v = verdict.violations[0]
    forged = replace(v, witness=tuple(reversed(v.witness[:2])) + (v.witness[0],))
    assert not replay(inst.graph, inst.truth, inst.params, forged)


def test_budget_exhaustion_raises():
    inst = violate_geodesic(n=20)
    tg = threshold(inst.graph, inst.params.eps)
    with pytest.raises(TooLarge):
        geodesic_witness(tg, inst.truth.cluster(0), inst.params.gamma, budget=1)


def test_min_radius_singleton_and_disconnected():
    g = SemimetricGraph(3, [(0, 1, 2), (1, 2, 5)])
    assert min_radius(g, {2}) == 2
    assert min_radius(g, {0, 1, 2}) == 5
    with pytest.raises(Disconnected):
        min_radius(g, {0, 2})
    assert min_connecting_radius(g, {0, 2}) == 5
    with pytest.raises(ValueError):
        min_radius(g, set())


@pytest.mark.parametrize("seed", range(15))
def test_min_radius_matches_brute_force(seed):
    rng = random.Random(3000 + seed)
    g = random_graph(rng, 12, p=0.7)
    members = set(rng.sample(range(12), rng.randint(1, 6)))
    try:
        got = min_radius(g, members)
    except Disconnected:
        return
    assert got == brute_min_radius(g, members)
    assert min_connecting_radius(g, members) <= got


@pytest.mark.parametrize("family,params", [
    ("random-convex", {"n": 30, "k": 2}),
    ("random-convex", {"n": 40, "k": 3}),
    ("random-two-scale", {"n": 36, "k": 3}),
    ("whirl", {"n": 40}),
    ("oort", {"ring": 24}),
    ("radii-path", {"n": 32, "k": 2}),
])
def test_two_radius_characterisations_agree_on_convex_instances(family, params):
    inst = generate(family, params, rng_seed=1)
    assert inst.n <= 40
    for members in inst.truth.clusters():
        assert min_radius(inst.graph, members) == min_connecting_radius(inst.graph, members)


def test_radius_report_flags_difference():
    inst = random_convex(n=30, k=2, rng_seed=2)
    larger = ConvexityParams(inst.params.beta, inst.params.gamma, inst.params.eps * 2)
    for row in radius_report(inst.graph, inst.truth, inst.params):
        assert Fraction(row["declared"]) >= Fraction(row["minimal"])
    assert all(row["differs"] for row in radius_report(inst.graph, inst.truth, larger))
    assert len(cluster_radii(inst.graph, inst.truth)) == 2


def test_verdict_dict_round_trip():
    inst = violate_margin()
    d = inst.check().to_dict()
    assert d["ok"] is False
    assert d["violations"][0]["property"] == MARGIN
