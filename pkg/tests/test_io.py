import json

import pytest

from scqcluster import io
from scqcluster.errors import InstanceFormatError
from scqcluster.instances import FAMILIES, generate

from test_instances import SMALL


@pytest.mark.parametrize("family", sorted(FAMILIES))
def test_round_trip(family, tmp_path):
    inst = generate(family, SMALL[family], rng_seed=1)
    path = tmp_path / "inst.json"
    io.save(inst, path)
    back = io.load(path)
    assert back.graph == inst.graph
    assert back.truth == inst.truth
    assert back.params == inst.params
    assert back.seeds == inst.seeds
    assert back.family == inst.family and back.tag == inst.tag and back.ball_cap == inst.ball_cap
    assert io.dumps(back) == path.read_text()


def test_format_fields():
    data = json.loads(io.dumps(generate("oort", {"ring": 24})))
    assert data["format_version"] == io.FORMAT_VERSION
    assert isinstance(data["params"]["radii"], list)
    assert all(isinstance(w, str) for _, _, w in data["edges"])
    single = json.loads(io.dumps(generate("whirl")))
    assert isinstance(single["params"]["radii"], str)


def _valid():
    return json.loads(io.dumps(generate("violate-margin")))


@pytest.mark.parametrize("mutate", [
    lambda d: d.update(format_version=99),
    lambda d: d.pop("edges"),
    lambda d: d.update(labels=d["labels"][:-1]),
    lambda d: d.update(seeds=list(reversed(d["seeds"]))),
    lambda d: d["params"].update(beta="abc"),
    lambda d: d["params"].update(gamma="2"),
    lambda d: d["params"].update(radii=["1"]),
    lambda d: d.update(edges=[[0, 0, "1"]]),
    lambda d: d.update(k=5),
    lambda d: d["params"].update(radii="1/0"),
])
def test_malformed_instances_are_rejected(mutate):
    data = _valid()
    mutate(data)
    with pytest.raises(InstanceFormatError):
        io.instance_from_dict(data)


def test_load_errors(tmp_path):
    with pytest.raises(InstanceFormatError):
        io.load(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(InstanceFormatError):
        io.load(bad)
    bad.write_text("[1, 2]")
    with pytest.raises(InstanceFormatError):
        io.load(bad)


def test_decimal_weights_are_exact():
    data = _valid()
    data["edges"][0][2] = "0.1"
    inst = io.instance_from_dict(data)
    u, v, _ = data["edges"][0]
    assert str(inst.graph.weight(u, v)) == "1/10"
