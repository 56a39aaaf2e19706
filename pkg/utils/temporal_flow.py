"""
Temporal Flow Module
Time-expanded oracles, temporally repeated flows, quickest horizons and arrival patterns
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Dict, List, Mapping, NamedTuple, Optional, Tuple
import sys

import networkx as nx
from networkx.algorithms.flow import edmonds_karp

sys.path.append(str(Path(__file__).parent.parent))
from config.settings import ORACLE_CAPS, SOLVER_SETTINGS
from utils.exceptions import CapExceededError, PreconditionError, ValidationError
from utils.helpers import INF, format_rational, is_infinite, parallel_map, parse_rational
from utils.network_model import NetworkOverTime, ensure_valid, gadget_transform
from utils.static_flow import PathDecomposition, path_decomposition, static_objective

logger = logging.getLogger(__name__)

SUPER_SOURCE = ("source",)
SUPER_SINK = ("sink",)

Interval = Tuple[int, int, Fraction]


def _capacity_attrs(capacity) -> dict:
    # networkx reads a missing capacity attribute as infinite
    return {} if is_infinite(capacity) else {"capacity": capacity}


def _add_capacity(graph: nx.DiGraph, tail, head, capacity):
    if graph.has_edge(tail, head):
        data = graph[tail][head]
        if "capacity" not in data:
            return
        if is_infinite(capacity):
            del data["capacity"]
        else:
            data["capacity"] += capacity
    else:
        graph.add_edge(tail, head, **_capacity_attrs(capacity))


@dataclass
class TimeExpandedGraph:
    """Copies (v, theta) for theta in 0..T-1 plus terminal bookkeeping"""
    network: NetworkOverTime
    horizon: int
    graph: nx.DiGraph
    movement: Dict[Tuple[str, str, int, int], List[int]] = field(default_factory=dict)

    @property
    def arc_count(self) -> int:
        return self.graph.number_of_edges()


def build_time_expanded(network: NetworkOverTime, T: int) -> TimeExpandedGraph:
    """Unit-step time expansion of a directed network

    Movement arcs leaving layer theta carry the rate on [theta, theta+1) and must
    arrive by layer T-1. Non-terminals hold over without limit, sinks hold at most
    |b_v| and drain into the super sink from the last layer. A source is fed by a
    chain of bucket nodes running backwards in time from the super source, which
    keeps its excess within [-b_v, 0] at every theta.
    """
    if T < 0:
        raise PreconditionError(f"horizon must be nonnegative, got {T}")
    if not network.is_directed:
        raise ValidationError("time expansion expects a directed network")
    for e in network.edges:
        if not isinstance(e.transit, int):
            raise ValidationError(f"edge {e.id} has non-integer transit {e.transit!r}")
    if T > ORACLE_CAPS["max_T"]:
        raise CapExceededError(f"horizon {T} exceeds the time-expansion cap {ORACLE_CAPS['max_T']}")

    graph = nx.DiGraph()
    expanded = TimeExpandedGraph(network, T, graph)
    if T == 0:
        return expanded

    for theta in range(T):
        for v in network.nodes:
            graph.add_node((v, theta))
    graph.add_node(SUPER_SOURCE)
    graph.add_node(SUPER_SINK)

    for theta in range(T):
        for e in network.edges:
            if theta + e.transit > T - 1:
                continue
            expanded.movement.setdefault((e.tail, e.head, theta, e.transit), []).append(e.id)
            _add_capacity(graph, (e.tail, theta), (e.head, theta + e.transit), e.capacity)

    for v in network.nodes:
        b = network.balance(v)
        if b > 0:
            graph.add_edge(SUPER_SOURCE, ("supply", v, T - 1), capacity=b)
            for theta in range(T - 1, 0, -1):
                graph.add_edge(("supply", v, theta), ("supply", v, theta - 1), capacity=b)
            for theta in range(T):
                graph.add_edge(("supply", v, theta), (v, theta))
                graph.add_edge((v, theta), ("supply", v, theta))
            continue
        for theta in range(T - 1):
            if b < 0:
                graph.add_edge((v, theta), (v, theta + 1), capacity=-b)
            else:
                graph.add_edge((v, theta), (v, theta + 1))
        if b < 0:
            graph.add_edge((v, T - 1), SUPER_SINK, capacity=-b)
    return expanded


@dataclass
class FlowOverTime:
    """Piecewise-constant rates on unit intervals, edge id -> ((a, b, rate), ...)"""
    network: NetworkOverTime
    horizon: int
    rates: Dict[int, Tuple[Interval, ...]] = field(default_factory=dict)

    def rate(self, edge_id: int, theta: int) -> Fraction:
        """Rate on [theta, theta+1)"""
        for a, b, rate in self.rates.get(edge_id, ()):
            if a <= theta < b:
                return rate
        return Fraction(0)

    def entered(self, edge_id: int, until: int) -> Fraction:
        """Amount that entered the edge during [0, until)"""
        total = Fraction(0)
        for a, b, rate in self.rates.get(edge_id, ()):
            if until > a:
                total += rate * (min(b, until) - a)
        return total

    def excess(self, node: str, theta: int) -> Fraction:
        return excess(self, node, theta)

    def value_at(self, theta: int) -> Fraction:
        return flow_value_at(self, theta)

    @property
    def value(self) -> Fraction:
        return flow_value_at(self, self.horizon)


def _check_theta(f: FlowOverTime, theta: int):
    if theta < 0 or theta > f.horizon:
        raise ValidationError(f"theta {theta} outside [0, {f.horizon}]")


def excess(f: FlowOverTime, node: str, theta: int) -> Fraction:
    """Flow that reached node by theta minus flow that left it"""
    _check_theta(f, theta)
    total = Fraction(0)
    for e in f.network.edges:
        if e.head == node and theta - e.transit > 0:
            total += f.entered(e.id, theta - e.transit)
        if e.tail == node:
            total -= f.entered(e.id, theta)
    return total


def flow_value_at(f: FlowOverTime, theta: int) -> Fraction:
    """|f|_theta, the flow that has reached the sinks by theta"""
    _check_theta(f, theta)
    return sum((excess(f, v, theta) for v in f.network.sinks), Fraction(0))


def check_feasibility(f: FlowOverTime, network: Optional[NetworkOverTime] = None) -> List[str]:
    """Capacity, tail condition and the three excess families at every integer theta"""
    network = network or f.network
    T = f.horizon
    problems = []
    for e in network.edges:
        for a, b, rate in f.rates.get(e.id, ()):
            if rate < 0:
                problems.append(f"edge {e.id}: negative rate {rate} on [{a},{b})")
            if not is_infinite(e.capacity) and rate > e.capacity:
                problems.append(f"edge {e.id}: rate {rate} exceeds capacity {e.capacity} on [{a},{b})")
            if rate > 0 and b > T - e.transit:
                problems.append(f"edge {e.id}: positive rate on [{a},{b}) but must vanish from {T - e.transit}")
    for v in network.nodes:
        b = network.balance(v)
        for theta in range(T + 1):
            x = excess(f, v, theta)
            if b > 0 and not (-b <= x <= 0):
                problems.append(f"source {v!r}: excess {x} at {theta} outside [{-b}, 0]")
            elif b < 0 and not (0 <= x <= -b):
                problems.append(f"sink {v!r}: excess {x} at {theta} outside [0, {-b}]")
            elif b == 0 and (x < 0 or (theta == T and x != 0)):
                problems.append(f"node {v!r}: excess {x} at {theta}")
    return problems


def _compress(layers: List[Fraction]) -> Tuple[Interval, ...]:
    intervals = []
    for theta, rate in enumerate(layers):
        if rate == 0:
            continue
        if intervals and intervals[-1][1] == theta and intervals[-1][2] == rate:
            a, _, r = intervals[-1]
            intervals[-1] = (a, theta + 1, r)
        else:
            intervals.append((theta, theta + 1, rate))
    return tuple(intervals)


def _directed_view(network: NetworkOverTime) -> NetworkOverTime:
    return network if network.is_directed else gadget_transform(network)


def _solve_expanded(network: NetworkOverTime, T: int):
    expanded = build_time_expanded(network, T)
    if T == 0 or not network.sources or not network.sinks:
        return expanded, Fraction(0), None
    value, flow_dict = nx.maximum_flow(expanded.graph, SUPER_SOURCE, SUPER_SINK,
                                       flow_func=edmonds_karp)
    return expanded, Fraction(value), flow_dict


def max_flow_value(network: NetworkOverTime, T: Optional[int] = None) -> Fraction:
    """Maximum flow-over-time value only"""
    T = network.horizon if T is None else T
    if T is None:
        raise PreconditionError("no horizon given and the network has none")
    _, value, _ = _solve_expanded(_directed_view(network.without_commodities()), T)
    return value


def max_flow_over_time(network: NetworkOverTime, T: Optional[int] = None) -> Tuple[Fraction, FlowOverTime]:
    """Exact maximum flow over time; undirected edges go through the gadget first"""
    ensure_valid(network)
    T = network.horizon if T is None else T
    if T is None:
        raise PreconditionError("no horizon given and the network has none")
    directed = _directed_view(network.without_commodities()).with_horizon(T)
    expanded, value, flow_dict = _solve_expanded(directed, T)
    witness = FlowOverTime(directed, T)
    if flow_dict is None:
        return value, witness

    layers: Dict[int, List[Fraction]] = {}
    for (tail, head, theta, transit), ids in expanded.movement.items():
        amount = Fraction(flow_dict[(tail, theta)][(head, theta + transit)])
        for edge_id in ids:
            capacity = directed.edges[edge_id].capacity
            share = amount if is_infinite(capacity) else min(amount, capacity)
            amount -= share
            if share:
                layers.setdefault(edge_id, [Fraction(0)] * T)[theta] += share
    witness.rates = {edge_id: _compress(rates) for edge_id, rates in sorted(layers.items())}
    logger.debug(f"Max flow over time at T={T}: {value}")
    return value, witness


@dataclass
class TemporallyRepeatedFlow:
    """Each path P sends x_P during [0, T - tau_P)"""
    network: NetworkOverTime
    decomposition: PathDecomposition
    horizon: int

    def path_transit(self, path) -> int:
        return sum(self.network.edges[edge_id].transit for edge_id in path)

    @property
    def value(self) -> Fraction:
        T = self.horizon
        return sum((rate * (T - self.path_transit(path)) for path, rate in self.decomposition.paths),
                   Fraction(0))

    def amounts_through(self, edge_id: int) -> Fraction:
        """Total amount sent through an edge over the horizon"""
        T = self.horizon
        return sum((rate * (T - self.path_transit(path))
                    for path, rate in self.decomposition.paths if edge_id in path), Fraction(0))

    def to_flow_over_time(self) -> FlowOverTime:
        T = self.horizon
        layers: Dict[int, List[Fraction]] = {}
        for path, rate in self.decomposition.paths:
            duration = T - self.path_transit(path)
            offset = 0
            for edge_id in path:
                rates = layers.setdefault(edge_id, [Fraction(0)] * T)
                for theta in range(offset, offset + duration):
                    rates[theta] += rate
                offset += self.network.edges[edge_id].transit
        return FlowOverTime(self.network, T,
                            {edge_id: _compress(rates) for edge_id, rates in sorted(layers.items())})


def temporally_repeated_from_static(x: Mapping[int, Fraction], network: NetworkOverTime, T: int,
                                    source: str, sink: str) -> TemporallyRepeatedFlow:
    decomposition = path_decomposition(x, network, source, sink)
    repeated = TemporallyRepeatedFlow(network, decomposition, T)
    for path, _ in decomposition.paths:
        if repeated.path_transit(path) >= T:
            raise PreconditionError(f"path {list(path)} has transit {repeated.path_transit(path)} >= {T}")
    objective = static_objective(x, network, source, T)
    if not decomposition.cycles and repeated.value != objective:
        logger.warning(f"Temporally repeated value {repeated.value} differs from static objective {objective}")
    return repeated


def _static_reachable_supply(network: NetworkOverTime) -> Fraction:
    """Largest total supply deliverable ignoring time: edge capacities become unbounded"""
    graph = nx.DiGraph()
    for e in network.edges:
        if is_infinite(e.capacity) or e.capacity > 0:
            graph.add_edge(e.tail, e.head)
    for v in network.sources:
        graph.add_edge(SUPER_SOURCE, v, capacity=network.balance(v))
    for v in network.sinks:
        graph.add_edge(v, SUPER_SINK, capacity=-network.balance(v))
    if SUPER_SOURCE not in graph or SUPER_SINK not in graph:
        return Fraction(0)
    value, _ = nx.maximum_flow(graph, SUPER_SOURCE, SUPER_SINK, flow_func=edmonds_karp)
    return Fraction(value)


def _shortest_terminal_distance(network: NetworkOverTime) -> int:
    graph = nx.DiGraph()
    graph.add_nodes_from(network.nodes)
    for e in network.edges:
        if is_infinite(e.capacity) or e.capacity > 0:
            if not graph.has_edge(e.tail, e.head) or graph[e.tail][e.head]["weight"] > e.transit:
                graph.add_edge(e.tail, e.head, weight=e.transit)
    best = None
    for v in network.sources:
        lengths = nx.single_source_dijkstra_path_length(graph, v, weight="weight")
        for t in network.sinks:
            if t in lengths and (best is None or lengths[t] < best):
                best = lengths[t]
    return 0 if best is None else int(best)


def quickest_transshipment_time(network: NetworkOverTime, max_T: Optional[int] = None):
    """Minimal integer horizon fulfilling all balances, or INF when supply cannot reach demand"""
    ensure_valid(network)
    max_T = SOLVER_SETTINGS["max_horizon"] if max_T is None else max_T
    directed = _directed_view(network.without_commodities())
    B = directed.total_supply
    if B == 0:
        return 0
    if _static_reachable_supply(directed) < B:
        logger.info("Supplies cannot reach demands at any horizon")
        return INF

    def feasible(T: int) -> bool:
        _, value, _ = _solve_expanded(directed, T)
        return value == B

    lo = _shortest_terminal_distance(directed)
    hi = lo + 1
    step = 1
    while not feasible(hi):
        lo = hi
        hi = lo + step
        step *= 2
        if hi > max_T:
            if feasible(max_T):
                hi = max_T
                break
            raise CapExceededError(f"no feasible horizon up to {max_T}")
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if feasible(mid):
            hi = mid
        else:
            lo = mid
    logger.info(f"Quickest transshipment horizon: {hi}")
    return hi


class QuickestBracket(NamedTuple):
    """The continuous optimum lies in [lower, upper]; lower_is_infimum marks an exact infimum"""
    lower: object
    upper: object
    lower_is_infimum: bool


def quickest_bracket(network: NetworkOverTime, max_T: Optional[int] = None) -> QuickestBracket:
    upper = quickest_transshipment_time(network, max_T)
    if is_infinite(upper) or upper == 0:
        return QuickestBracket(upper, upper, False)
    all_infinite = all(is_infinite(e.capacity) for e in network.edges)
    # with unbounded rates, everything sent in the first unit step can be sent in any sliver
    return QuickestBracket(upper - 1, upper, all_infinite)


def _pattern_point(args) -> Fraction:
    network, theta = args
    return max_flow_value(network, theta)


def earliest_arrival_pattern(network: NetworkOverTime, T_max: int, jobs: int = 1) -> Dict[int, Fraction]:
    """p(theta) for theta = 0..T_max"""
    if T_max < 0:
        raise PreconditionError(f"T_max must be nonnegative, got {T_max}")
    ensure_valid(network)
    directed = _directed_view(network.without_commodities())
    values = parallel_map(_pattern_point, [(directed, theta) for theta in range(T_max + 1)], jobs)
    return {theta: value for theta, value in enumerate(values)}


def flow_to_dict(f: FlowOverTime, value: Optional[Fraction] = None) -> dict:
    return {
        "horizon": f.horizon,
        "value": format_rational(f.value if value is None else value),
        "edges": {str(edge_id): [{"from": a, "to": b, "rate": format_rational(rate)}
                                 for a, b, rate in intervals]
                  for edge_id, intervals in sorted(f.rates.items())},
    }


def flow_from_dict(data: dict, network: NetworkOverTime) -> FlowOverTime:
    rates = {int(edge_id): tuple((int(i["from"]), int(i["to"]), parse_rational(i["rate"])) for i in intervals)
             for edge_id, intervals in data.get("edges", {}).items()}
    return FlowOverTime(network, int(data["horizon"]), rates)
