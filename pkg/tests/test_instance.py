import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from linkdrain.colgen import solve_cg
from linkdrain.errors import DomainError, GenerationError, SchemaError
from linkdrain.instance import (DEFAULT_SIGMA2, GeneratorParams, Instance, cardinality_instance,
                                generate, load, parse_demand, save)
from linkdrain.rate_model import CardinalityOracle, ShannonOracle


def test_generate_defaults():
    inst = generate(GeneratorParams(n=15, seed=3))
    assert inst.n == 15
    assert np.all(inst.demands == 1000.0)
    G = inst.oracle.channel.G
    assert np.all(G > 0)
    assert isinstance(inst.oracle, ShannonOracle)


def test_generate_is_deterministic():
    p = GeneratorParams(n=9, seed=11, demand=("random", 100.0, 1500.0), rate="bpsk")
    a, b = generate(p), generate(p)
    assert a == b
    assert save(a) == save(b)
    assert not generate(GeneratorParams(n=9, seed=12)) == a


def test_random_demand_range():
    inst = generate(GeneratorParams(n=30, seed=1, demand=("random", 100.0, 1500.0)))
    assert inst.demands.min() >= 100.0 and inst.demands.max() <= 1500.0
    assert np.all(np.diff(inst.demands) >= 0)


def test_single_link_instance():
    inst = generate(GeneratorParams(n=1, seed=5))
    rep = solve_cg(inst)
    assert rep.length == pytest.approx(inst.demands[0] / inst.singleton_rates()[0], rel=1e-12)


def test_direct_gain_dominates_cross_gain_on_average():
    ratios = []
    for seed in range(20):
        G = generate(GeneratorParams(n=10, seed=seed)).oracle.channel.G
        off = G[~np.eye(10, dtype=bool)]
        ratios.append(np.median(np.diag(G)) / np.median(off))
    assert np.median(ratios) > 100


def test_default_noise_gives_20db_at_mid_distance():
    mid = (3.0 + 250.0) / 2
    assert 10 * np.log10(mid ** -4 / DEFAULT_SIGMA2) == pytest.approx(20.0)


def test_receivers_within_distance_range():
    inst = generate(GeneratorParams(n=25, seed=2))
    g = np.diag(inst.oracle.channel.G)
    dist = g ** -0.25
    assert dist.min() >= 3.0 - 1e-9 and dist.max() <= 250.0 + 1e-9


def test_generator_validation():
    with pytest.raises(DomainError):
        GeneratorParams(min_distance=300.0).validate()
    with pytest.raises(DomainError):
        GeneratorParams(exponent=0.0).validate()
    with pytest.raises(DomainError):
        GeneratorParams(rate="cardinality").validate()


def test_generation_error_when_placement_impossible():
    # receivers can never land inside a 5 m square at 4..4.9 m from a corner-ish transmitter
    p = GeneratorParams(n=40, area=5.0, min_distance=4.0, max_distance=4.9, seed=0)
    with pytest.raises(GenerationError):
        generate(p)


def test_roundtrip_exact():
    for rate in ("shannon", "bpsk", "binary"):
        inst = generate(GeneratorParams(n=7, seed=4, rate=rate, demand=("random", 100, 1500)))
        back = load(save(inst))
        assert back == inst
        masks = np.arange(1, 1 << 7)
        assert np.array_equal(back.rates(masks), inst.rates(masks))


def test_roundtrip_file(tmp_path):
    inst = cardinality_instance([3.0, 1.0, 2.0], [3.0, 2.0, 1.0])
    path = tmp_path / "x.json"
    save(inst, path)
    assert load(path) == inst
    assert load(str(path)) == inst


def test_zero_demand_rejected():
    doc = {"n": 2, "demands": [0.0, 5.0], "oracle": {"variant": "cardinality", "r": [2, 1]}}
    with pytest.raises(SchemaError):
        load(json.dumps(doc))


def test_dimension_mismatch_rejected():
    doc = {"n": 3, "demands": [1.0, 5.0], "oracle": {"variant": "cardinality", "r": [2, 1]}}
    with pytest.raises(SchemaError):
        load(json.dumps(doc))


def test_unsorted_with_order_rejected():
    doc = {"n": 2, "demands": [5.0, 1.0], "order": [0, 1],
           "oracle": {"variant": "cardinality", "r": [2, 1]}}
    with pytest.raises(SchemaError):
        load(json.dumps(doc))


def test_example1_instance_from_json():
    doc = {"n": 3, "demands": [1000, 2000, 3000], "oracle": {"variant": "cardinality", "r": [6, 5, 4]}}
    inst = load(json.dumps(doc))
    assert inst == cardinality_instance([1000, 2000, 3000], [6, 5, 4])
    assert inst.rate(0, 0b101) == 5.0


def test_demand_permutation_roundtrip():
    inst = Instance.create([30.0, 10.0, 20.0], CardinalityOracle([3, 2, 1]))
    assert inst.demands.tolist() == [10.0, 20.0, 30.0]
    assert list(inst.order) == [1, 2, 0]
    for m in range(1, 8):
        assert inst.from_original(inst.to_original(m)) == m
    # internal link 0 is original link 1
    assert inst.to_original(0b001) == 0b010


def test_schedule_reports_original_ids():
    inst = cardinality_instance([3000.0, 1000.0, 2000.0], [6, 5, 4])
    rep = solve_cg(inst)
    doc = rep.schedule.to_json_dict(inst)
    groups = sorted(tuple(e["links"]) for e in doc["entries"])
    # optimum pairs the largest demand (original link 0) with each of the others
    assert groups == [(0, 1), (0, 2)]


@given(st.lists(st.floats(1.0, 1e4), min_size=1, max_size=8))
@settings(max_examples=40, deadline=None)
def test_create_sorts_stably(d):
    inst = cardinality_instance(d, np.linspace(3, 1, len(d)))
    assert np.all(np.diff(inst.demands) >= 0)
    assert sorted(d) == inst.demands.tolist()
    assert [d[k] for k in inst.order] == inst.demands.tolist()


def test_parse_demand():
    assert parse_demand("uniform:1000") == ("uniform", 1000.0)
    assert parse_demand("random:100:1500") == ("random", 100.0, 1500.0)
    with pytest.raises(DomainError):
        parse_demand("gauss:1")
