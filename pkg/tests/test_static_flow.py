from fractions import Fraction

import pytest

from utils.exceptions import ConservationError, PreconditionError, UnboundedFlowError
from utils.network_model import NetworkBuilder, gadget_layout, gadget_transform
from utils.static_flow import (
    cancel_opposing_gadget_flow, check_conservation, flow_value, max_temporally_repeated_static_flow,
    path_decomposition, shortest_path_deterministic, static_objective
)


def test_successive_shortest_paths_on_chain(chain):
    x = max_temporally_repeated_static_flow(chain, "s", "t", 4)
    assert x == {0: 1, 1: 1, 2: 1}
    assert flow_value(x, chain, "s") == 2
    assert static_objective(x, chain, "s", 4) == 3


def test_paths_at_least_as_long_as_the_horizon_are_skipped(chain):
    x = max_temporally_repeated_static_flow(chain, "s", "t", 2)
    assert flow_value(x, chain, "s") == 0


def test_negative_horizon_is_rejected(chain):
    with pytest.raises(PreconditionError):
        max_temporally_repeated_static_flow(chain, "s", "t", -1)


def test_infinite_short_path_is_unbounded():
    g = NetworkBuilder(undirected=False)
    g.add_edge("s", "t")
    with pytest.raises(UnboundedFlowError):
        max_temporally_repeated_static_flow(g.build(), "s", "t", 1)


def test_shortest_path_prefers_low_transit(chain):
    assert shortest_path_deterministic(chain, "s", "t") == [0, 1]
    assert shortest_path_deterministic(chain, "t", "s") is None


def _parallel_pair(first_transit: int, second_transit: int):
    g = NetworkBuilder(undirected=False)
    g.add_edge("s", "t", 1, first_transit)
    g.add_edge("s", "t", 1, second_transit)
    return g.build()


def test_parallel_edges_prefer_the_shorter_transit():
    assert shortest_path_deterministic(_parallel_pair(2, 1), "s", "t") == [1]


def test_equal_parallel_edges_take_the_lower_id():
    assert shortest_path_deterministic(_parallel_pair(1, 1), "s", "t") == [0]


def test_decomposition_extracts_paths_in_order(chain):
    x = max_temporally_repeated_static_flow(chain, "s", "t", 4)
    decomposition = path_decomposition(x, chain, "s", "t")
    assert decomposition.paths == [((0, 1), 1), ((2,), 1)]
    assert decomposition.cycles == []
    assert [decomposition.transit(chain, p) for p, _ in decomposition] == [2, 3]


def test_decomposition_rejects_broken_conservation(chain):
    with pytest.raises(ConservationError):
        path_decomposition({0: Fraction(1), 1: Fraction(0), 2: Fraction(0)}, chain, "s", "t")


def test_conservation_reports_capacity_violation(chain):
    problems = check_conservation({0: Fraction(3), 1: Fraction(3), 2: Fraction(0)}, chain, ("s", "t"))
    assert any("outside" in p for p in problems)


def test_undirected_edge_through_the_gadget():
    g = NetworkBuilder()
    g.add_edge("s", "t", Fraction(1, 2), 1)
    network = g.build()
    gadget = gadget_transform(network)
    x = max_temporally_repeated_static_flow(gadget, "s", "t", 3)
    assert flow_value(x, gadget, "s") == Fraction(1, 2)
    assert static_objective(x, gadget, "s", 3) == 1


def test_cancel_opposing_gadget_flow_nets_both_directions():
    g = NetworkBuilder()
    g.add_edge("v", "w", 5, 0)
    network = g.build()
    arcs = gadget_layout(network)[0]
    flow = {arcs.enter_tail: Fraction(2), arcs.enter_head: Fraction(1), arcs.middle: Fraction(3),
            arcs.leave_tail: Fraction(1), arcs.leave_head: Fraction(2)}
    cancelled = cancel_opposing_gadget_flow(flow, {0: arcs})
    assert cancelled[arcs.enter_tail] == 1
    assert cancelled[arcs.leave_head] == 1
    assert cancelled[arcs.enter_head] == 0
    assert cancelled[arcs.leave_tail] == 0
    assert cancelled[arcs.middle] == 1


def test_cancel_leaves_one_directional_flow_alone():
    g = NetworkBuilder()
    g.add_edge("v", "w", 5, 0)
    arcs = gadget_layout(g.build())[0]
    flow = {arcs.enter_tail: Fraction(2), arcs.enter_head: Fraction(0), arcs.middle: Fraction(2),
            arcs.leave_tail: Fraction(0), arcs.leave_head: Fraction(2)}
    assert cancel_opposing_gadget_flow(flow, {0: arcs}) == flow
