import json
from fractions import Fraction

import pytest

from utils.exceptions import ValidationError
from utils.helpers import INF
from utils.network_model import (
    NetworkBuilder, apply_orientation, canonical_orientation, gadget_layout, gadget_transform,
    load_network, network_from_dict, network_to_dict, orientation_from_bits, orientation_from_dict,
    orientation_label, orientation_to_dict, validate
)


def test_builder_assigns_dense_edge_ids():
    g = NetworkBuilder()
    first = g.add_edge("a", "b", 1, 2)
    second = g.add_edge("b", "c")
    network = g.build(5)
    assert (first, second) == (0, 1)
    assert network.nodes == ("a", "b", "c")
    assert network.edges[1].capacity == INF
    assert network.horizon == 5
    assert validate(network) == []


def test_unbalanced_network_is_reported():
    g = NetworkBuilder()
    g.add_node("s", 2)
    g.add_node("t", -1)
    g.add_edge("s", "t")
    problems = validate(g.build())
    assert any("balance sum" in p for p in problems)


def test_loop_and_negative_transit_are_reported():
    g = NetworkBuilder()
    g.add_edge("a", "a")
    g.add_edge("a", "b", 1, -1)
    problems = validate(g.build())
    assert any("loop" in p for p in problems)
    assert any("transit" in p for p in problems)


def test_fig1_terminals(fig1):
    assert fig1.sources == ["s1", "s2"]
    assert fig1.sinks == ["t"]
    assert fig1.total_supply == 2
    assert fig1.is_undirected


def test_gadget_size(fig1):
    gadget = gadget_transform(fig1)
    assert gadget.n == fig1.n + 2 * fig1.m
    assert gadget.m == 5 * fig1.m
    assert gadget.n == 15 and gadget.m == 25
    assert gadget.is_directed


def test_gadget_middle_arc_keeps_capacity_and_transit(fig1):
    gadget = gadget_transform(fig1)
    layout = gadget_layout(fig1)
    for e in fig1.edges:
        middle = gadget.edges[layout[e.id].middle]
        assert middle.capacity == e.capacity
        assert middle.transit == e.transit
        assert gadget.edges[layout[e.id].enter_tail].tail == e.tail
        assert gadget.edges[layout[e.id].leave_head].head == e.head


def test_canonical_orientation_runs_low_to_high(fig1):
    orientation = canonical_orientation(fig1)
    assert orientation[2] == ("i", "j")
    assert orientation[4] == ("i", "t")


def test_orientation_bits_reverse_canonical(fig1):
    bits = (1, 0, 0, 0, 0)
    orientation = orientation_from_bits(fig1, bits)
    assert orientation[0] == ("i", "s1")
    assert orientation[1] == ("s2", "j")


def test_apply_orientation_directs_every_edge(fig1):
    oriented = apply_orientation(fig1, canonical_orientation(fig1))
    assert oriented.is_directed
    assert [e.capacity for e in oriented.edges] == [e.capacity for e in fig1.edges]


def test_apply_orientation_rejects_foreign_direction(fig1):
    orientation = canonical_orientation(fig1)
    orientation[0] = ("s1", "t")
    with pytest.raises(ValidationError):
        apply_orientation(fig1, orientation)


def test_apply_orientation_requires_every_edge(fig1):
    orientation = canonical_orientation(fig1)
    del orientation[3]
    with pytest.raises(ValidationError):
        apply_orientation(fig1, orientation)


def test_instance_json_uses_exact_strings(fig1):
    data = network_to_dict(fig1)
    capacities = [edge["capacity"] for edge in data["edges"]]
    assert "1/4" in capacities
    assert data["balances"] == {"s1": "1", "s2": "1", "t": "-2"}
    assert data["metadata"]["family"] == "fig1"
    again = network_from_dict(json.loads(json.dumps(data)))
    assert again == fig1


def test_instance_json_rejects_fractional_transit(fig1):
    data = network_to_dict(fig1)
    data["edges"][0]["transit"] = 0.5
    with pytest.raises(ValidationError):
        network_from_dict(data)


def test_load_network_rejects_bad_json(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    with pytest.raises(ValidationError):
        load_network(path)


def test_orientation_dict_format(fig1):
    orientation = canonical_orientation(fig1)
    data = orientation_to_dict(orientation)
    assert data["0"] == ["s1", "i"]
    assert orientation_from_dict(json.loads(json.dumps(data))) == orientation
    with pytest.raises(ValidationError):
        orientation_from_dict({"0": "s1>i"})
    with pytest.raises(ValidationError):
        orientation_from_dict({"first": ["s1", "i"]})


def test_orientation_keeps_node_ids_with_separators():
    g = NetworkBuilder()
    g.add_edge("a>b", "c-d", 1, 0)
    network = g.build()
    orientation = {0: ("c-d", "a>b")}
    assert orientation_from_dict(orientation_to_dict(orientation)) == orientation
    assert apply_orientation(network, orientation).edges[0].tail == "c-d"
    assert orientation_label(orientation) == "c-d>a>b"


def test_with_capacities_replaces_only_named_edges(fig1):
    changed = fig1.with_capacities({0: Fraction(3)})
    assert changed.edges[0].capacity == 3
    assert changed.edges[1].capacity == Fraction(1, 4)
