from fractions import Fraction

import networkx as nx
import pytest
from networkx.algorithms.flow import edmonds_karp

from utils.exceptions import CapExceededError, PreconditionError, ValidationError
from utils.generators import random_network
from utils.helpers import INF, is_infinite
from utils.network_model import NetworkBuilder
from utils.static_flow import max_temporally_repeated_static_flow, static_objective
from utils.temporal_flow import (
    SUPER_SINK, SUPER_SOURCE, FlowOverTime, build_time_expanded, check_feasibility, earliest_arrival_pattern,
    flow_from_dict, flow_to_dict, flow_value_at, max_flow_over_time, max_flow_value, quickest_bracket,
    quickest_transshipment_time, temporally_repeated_from_static
)


def _single_arc(capacity, transit, supply):
    g = NetworkBuilder(undirected=False)
    g.add_node("s", supply)
    g.add_node("t", -supply)
    g.add_edge("s", "t", capacity, transit)
    return g.build()


def test_max_flow_on_chain(chain):
    assert max_flow_value(chain, 4) == 3


def test_witness_is_feasible_and_sends_the_value(chain):
    value, witness = max_flow_over_time(chain, 4)
    assert value == 3
    assert check_feasibility(witness) == []
    assert witness.value == 3
    assert flow_value_at(witness, 4) == 3
    assert flow_value_at(witness, 0) == 0


def test_fig1_undirected_value(fig1):
    value, witness = max_flow_over_time(fig1)
    assert value == 2
    assert check_feasibility(witness) == []


def test_supply_limits_the_value():
    network = _single_arc(5, 1, 2)
    assert max_flow_value(network, 10) == 2


def test_zero_horizon_sends_nothing(chain):
    assert max_flow_value(chain, 0) == 0


def test_missing_horizon_is_a_precondition_error():
    with pytest.raises(PreconditionError):
        max_flow_value(_single_arc(1, 0, 1))


def _seeds(count: int, fast: int):
    """Seeds 0..count-1; those from fast on only run with the slow suite"""
    return [seed if seed < fast else pytest.param(seed, marks=pytest.mark.slow) for seed in range(count)]


@pytest.mark.parametrize("seed", _seeds(200, 12))
def test_temporally_repeated_flow_matches_time_expansion(seed):
    network = random_network(seed, n=5 + seed % 4, m=7 + seed % 8, max_transit=4,
                             horizon=4 + seed % 5, undirected=False)
    s, t = network.sources[0], network.sinks[0]
    network = network.with_balances({s: 10 ** 6, t: -10 ** 6})
    T = network.horizon
    x = max_temporally_repeated_static_flow(network, s, t, T)
    assert static_objective(x, network, s, T) == max_flow_value(network, T)
    repeated = temporally_repeated_from_static(x, network, T, s, t)
    flow = repeated.to_flow_over_time()
    assert check_feasibility(flow) == []
    assert flow.value == repeated.value


def test_time_expansion_needs_directed_network(fig1):
    with pytest.raises(ValidationError):
        build_time_expanded(fig1, 4)


def test_time_expansion_cap():
    with pytest.raises(CapExceededError):
        build_time_expanded(_single_arc(1, 0, 1), 10 ** 6)


def test_time_expansion_merges_parallel_arcs():
    g = NetworkBuilder(undirected=False)
    g.add_node("s", 4)
    g.add_node("t", -4)
    g.add_edge("s", "t", 1, 0)
    g.add_edge("s", "t", 1, 0)
    network = g.build()
    expanded = build_time_expanded(network, 2)
    assert expanded.movement[("s", "t", 0, 0)] == [0, 1]
    assert expanded.graph[("s", 0)][("t", 0)]["capacity"] == 2
    assert max_flow_value(network, 2) == 4


def test_quickest_time_single_arc():
    assert quickest_transshipment_time(_single_arc(1, 1, 2)) == 3


def test_quickest_time_without_supply_is_zero():
    g = NetworkBuilder()
    g.add_edge("a", "b")
    assert quickest_transshipment_time(g.build()) == 0


def test_quickest_time_unreachable_sink_is_infinite():
    g = NetworkBuilder(undirected=False)
    g.add_node("s", 1)
    g.add_node("t", -1)
    g.add_edge("t", "s")
    assert quickest_transshipment_time(g.build()) == INF


def test_quickest_bracket_with_unbounded_rates():
    bracket = quickest_bracket(_single_arc(INF, 2, 1))
    assert bracket == (2, 3, True)


def test_quickest_bracket_with_finite_capacity():
    bracket = quickest_bracket(_single_arc(1, 1, 2))
    assert bracket.upper == 3
    assert bracket.lower == 2
    assert not bracket.lower_is_infimum


def test_unit_tree_quickest_time(unit_tree):
    assert quickest_transshipment_time(unit_tree) == 3


def test_earliest_arrival_pattern_is_monotone(chain):
    pattern = earliest_arrival_pattern(chain, 6)
    values = [pattern[t] for t in range(7)]
    assert values[0] == 0
    assert values[4] == 3
    assert all(a <= b for a, b in zip(values, values[1:]))


def test_witness_dict_reads_back(chain):
    value, witness = max_flow_over_time(chain, 4)
    data = flow_to_dict(witness, value)
    assert data["value"] == "3"
    again = flow_from_dict(data, witness.network)
    assert again.rates == witness.rates


def test_feasibility_flags_capacity_and_late_flow():
    network = _single_arc(1, 2, 5).with_horizon(3)
    flow = FlowOverTime(network, 3, {0: ((0, 2, Fraction(2)),)})
    problems = check_feasibility(flow)
    assert any("exceeds capacity" in p for p in problems)
    assert any("must vanish" in p for p in problems)


def _joint_capacity_value(network, T):
    """Max flow over time where both directions of an undirected edge share one capacity per layer"""
    g = NetworkBuilder(undirected=False)
    g.add_nodes(*network.nodes)
    for v, b in network.balances.items():
        g.set_balance(v, b)
    for e in network.edges:
        if not e.undirected:
            g.add_edge(e.tail, e.head, e.capacity, e.transit)
    graph = build_time_expanded(g.build(), T).graph
    for e in network.undirected_edges:
        for theta in range(T - e.transit):
            joint_in, joint_out = ("joint-in", e.id, theta), ("joint-out", e.id, theta)
            for v in e.endpoints:
                graph.add_edge((v, theta), joint_in)
                graph.add_edge(joint_out, (v, theta + e.transit))
            if is_infinite(e.capacity):
                graph.add_edge(joint_in, joint_out)
            else:
                graph.add_edge(joint_in, joint_out, capacity=e.capacity)
    value, _ = nx.maximum_flow(graph, SUPER_SOURCE, SUPER_SINK, flow_func=edmonds_karp)
    return Fraction(value)


@pytest.mark.parametrize("seed", range(12))
def test_gadget_matches_joint_capacity(seed):
    network = random_network(seed, n=4 + seed % 3, m=6)
    T = network.horizon
    assert max_flow_value(network, T) == _joint_capacity_value(network, T)
