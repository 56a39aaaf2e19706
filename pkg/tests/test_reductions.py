from fractions import Fraction

import pytest

from utils.exceptions import PreconditionError, ValidationError
from utils.helpers import INF
from utils.mc_feasibility import max_concurrent_value, mc_quickest_time
from utils.network_model import apply_orientation
from utils.reductions import (
    CnfFormula, PartitionInstance, assignment_orientation, is_satisfiable, parse_dimacs,
    parse_partition, reduce_3sat_concurrent, reduce_3sat_mc_quickest, reduce_3sat_quickest,
    reduce_partition_maxfot, restricted_edges, satisfying_assignment, verify_partition_maxfot,
    verify_sat_concurrent, verify_sat_mc_quickest, verify_sat_quickest
)

ONE_CLAUSE = CnfFormula.from_ints(3, [[1, 2, 3]])
CONTRADICTION = CnfFormula.from_ints(1, [[1, 1, 1], [-1, -1, -1]])
ALL_SIGNS = CnfFormula.from_ints(3, [[a * 1, b * 2, c * 3] for a in (1, -1) for b in (1, -1) for c in (1, -1)])


def test_parse_dimacs():
    formula = parse_dimacs("c comment\np cnf 3 2\n1 -2 3 0\n-1 2 -3 0\n")
    assert formula.num_vars == 3
    assert formula.clauses[0] == ((1, False), (2, True), (3, False))
    assert parse_dimacs(formula.to_dimacs()) == formula


def test_dimacs_needs_header_and_three_literals():
    with pytest.raises(ValidationError):
        parse_dimacs("1 2 3 0\n")
    with pytest.raises(ValidationError):
        parse_dimacs("p cnf 2 1\n1 2 0\n")
    with pytest.raises(ValidationError):
        parse_dimacs("p cnf 2 1\n1 2 5 0\n")


def test_dpll():
    assert is_satisfiable(ONE_CLAUSE)
    assert ONE_CLAUSE.evaluate(satisfying_assignment(ONE_CLAUSE))
    assert not is_satisfiable(CONTRADICTION)
    assert not is_satisfiable(ALL_SIGNS)
    assert satisfying_assignment(ALL_SIGNS) is None


def test_partition_labels():
    assert PartitionInstance((1, 1, 2)).is_yes()
    assert not PartitionInstance((1, 1, 4)).is_yes()
    assert parse_partition("3 1 1 1").L == 3
    with pytest.raises(ValidationError):
        parse_partition("1 2")
    with pytest.raises(ValidationError):
        parse_partition("1 x")


def test_partition_network_shape():
    network = reduce_partition_maxfot(PartitionInstance((1, 1, 2)))
    assert network.m == 2 * 3 + 4
    assert network.horizon == 6
    assert network.total_supply == 2


def test_sat_quickest_network_metadata():
    network = reduce_3sat_quickest(ONE_CLAUSE, 2, 0)
    edge_ids, base = restricted_edges(network)
    assert len(edge_ids) == 2 * ONE_CLAUSE.num_vars
    assert len(base) == network.m - len(edge_ids)
    widened, _ = restricted_edges(network, widen=True)
    assert len(widened) == 4 * ONE_CLAUSE.num_vars
    with pytest.raises(PreconditionError):
        reduce_3sat_quickest(ONE_CLAUSE, 0, 0)


def test_sat_quickest_gap_yes():
    report = verify_sat_quickest(ONE_CLAUSE, 2, 0)
    assert report.label == "YES"
    assert report.measured == 2
    assert report.details["integer_horizon"] == "3"
    assert report.holds


def test_sat_quickest_gap_no():
    report = verify_sat_quickest(CONTRADICTION, 2, 0)
    assert report.label == "NO"
    assert report.measured == 4
    assert report.details["integer_horizon"] == "5"
    assert report.holds


def test_assignment_orientation_directs_true_literals_down():
    network = reduce_3sat_quickest(ONE_CLAUSE, 2, 0)
    orientation = assignment_orientation(network, {1: True, 2: False, 3: False})
    by_pair = {network.edges[e].tail: orientation[e] for e in network.metadata["literal_edges"]}
    assert by_pair["x1^1"] == ("x1^1", "x1^2")
    assert by_pair["~x1^1"] == ("~x1^2", "~x1^1")
    assert by_pair["x2^1"] == ("x2^2", "x2^1")
    assert by_pair["~x2^1"] == ("~x2^1", "~x2^2")


def test_concurrent_rejects_repeated_variables():
    with pytest.raises(PreconditionError):
        reduce_3sat_concurrent(CONTRADICTION)


def test_concurrent_assignment_value():
    network = reduce_3sat_concurrent(ONE_CLAUSE)
    orientation = assignment_orientation(network, satisfying_assignment(ONE_CLAUSE))
    assert max_concurrent_value(apply_orientation(network, orientation)) >= Fraction(1, 3)


def test_concurrent_gap_no():
    report = verify_sat_concurrent(ALL_SIGNS)
    assert report.label == "NO"
    assert report.measured == 0
    assert report.details["evaluated"] == 64
    assert report.holds


def test_mc_quickest_parameters():
    with pytest.raises(PreconditionError):
        reduce_3sat_mc_quickest(CONTRADICTION, 1)
    with pytest.raises(PreconditionError):
        reduce_3sat_mc_quickest(ONE_CLAUSE, 3)


def test_mc_quickest_yes_in_one_step():
    network = reduce_3sat_mc_quickest(ONE_CLAUSE, 2)
    orientation = assignment_orientation(network, {1: True, 2: True, 3: True})
    assert mc_quickest_time(apply_orientation(network, orientation), 2) == 1


def test_mc_quickest_gap_no():
    report = verify_sat_mc_quickest(CONTRADICTION, 2)
    assert report.label == "NO"
    assert report.measured == INF
    assert report.holds


@pytest.mark.slow
def test_concurrent_gap_yes():
    report = verify_sat_concurrent(ONE_CLAUSE)
    assert report.label == "YES"
    assert report.measured >= Fraction(1, 3)
    assert report.holds


@pytest.mark.slow
@pytest.mark.parametrize("values, expected", [((1, 1, 2), 2), ((1, 1, 4), 1)])
def test_partition_gap(values, expected):
    report = verify_partition_maxfot(PartitionInstance(values))
    assert report.measured == expected
    assert report.holds
