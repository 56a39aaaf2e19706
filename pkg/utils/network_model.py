"""
Network Model
Networks over time, orientations and the undirected-edge gadget
"""

import json
import logging
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import cached_property
from pathlib import Path
from typing import Dict, List, Mapping, NamedTuple, Optional, Sequence, Tuple
import sys

sys.path.append(str(Path(__file__).parent.parent))
from utils.exceptions import ValidationError
from utils.helpers import INF, format_rational, is_infinite, parse_rational

logger = logging.getLogger(__name__)

Orientation = Dict[int, Tuple[str, str]]


@dataclass(frozen=True)
class Edge:
    """An edge with exact capacity (Fraction or INF) and integer transit time"""
    id: int
    tail: str
    head: str
    capacity: object = INF
    transit: int = 0
    undirected: bool = True

    @property
    def endpoints(self) -> Tuple[str, str]:
        return (self.tail, self.head)

    def other(self, node: str) -> str:
        return self.head if node == self.tail else self.tail


@dataclass(frozen=True)
class Commodity:
    id: int
    balances: Mapping[str, Fraction]

    @property
    def supply(self) -> Fraction:
        return sum((b for b in self.balances.values() if b > 0), Fraction(0))


@dataclass(frozen=True)
class NetworkOverTime:
    """Directed, undirected or mixed network over time

    Node and edge ids are positions: edge ids are 0..m-1 in order and every
    tie-break in the solvers keys on them.
    """
    nodes: Tuple[str, ...]
    edges: Tuple[Edge, ...]
    balances: Mapping[str, Fraction] = field(default_factory=dict)
    horizon: Optional[int] = None
    commodities: Tuple[Commodity, ...] = ()
    metadata: Mapping = field(default_factory=dict, compare=False)

    @cached_property
    def node_index(self) -> Dict[str, int]:
        return {v: i for i, v in enumerate(self.nodes)}

    @property
    def n(self) -> int:
        return len(self.nodes)

    @property
    def m(self) -> int:
        return len(self.edges)

    def balance(self, node: str) -> Fraction:
        return self.balances.get(node, Fraction(0))

    @property
    def sources(self) -> List[str]:
        return [v for v in self.nodes if self.balance(v) > 0]

    @property
    def sinks(self) -> List[str]:
        return [v for v in self.nodes if self.balance(v) < 0]

    @property
    def total_supply(self) -> Fraction:
        """B, the sum of positive balances"""
        return sum((self.balance(v) for v in self.sources), Fraction(0))

    @property
    def is_undirected(self) -> bool:
        return all(e.undirected for e in self.edges)

    @property
    def is_directed(self) -> bool:
        return not any(e.undirected for e in self.edges)

    @property
    def undirected_edges(self) -> List[Edge]:
        return [e for e in self.edges if e.undirected]

    def edge(self, edge_id: int) -> Edge:
        return self.edges[edge_id]

    def incident(self, node: str) -> List[Edge]:
        return [e for e in self.edges if node in e.endpoints]

    def out_edges(self, node: str) -> List[Edge]:
        """Arcs leaving node; undirected edges count in both directions"""
        return [e for e in self.edges
                if e.tail == node or (e.undirected and e.head == node)]

    def with_horizon(self, horizon: Optional[int]) -> "NetworkOverTime":
        return replace(self, horizon=horizon)

    def with_balances(self, balances: Mapping[str, Fraction]) -> "NetworkOverTime":
        return replace(self, balances={v: Fraction(b) for v, b in balances.items() if b != 0})

    def with_capacities(self, capacities: Mapping[int, object]) -> "NetworkOverTime":
        edges = tuple(replace(e, capacity=capacities[e.id]) if e.id in capacities else e
                      for e in self.edges)
        return replace(self, edges=edges)

    def without_commodities(self) -> "NetworkOverTime":
        return replace(self, commodities=())


class NetworkBuilder:
    """Incremental construction; edge ids follow insertion order"""

    def __init__(self, undirected: bool = True):
        self.undirected = undirected
        self._nodes: List[str] = []
        self._seen = set()
        self._edges: List[Edge] = []
        self._balances: Dict[str, Fraction] = {}
        self._commodities: List[Commodity] = []

    def add_node(self, node: str, balance=0) -> str:
        if node not in self._seen:
            self._seen.add(node)
            self._nodes.append(node)
        if balance:
            self._balances[node] = self._balances.get(node, Fraction(0)) + Fraction(balance)
        return node

    def add_nodes(self, *nodes: str):
        for node in nodes:
            self.add_node(node)

    def add_edge(self, tail: str, head: str, capacity=INF, transit: int = 0,
                 undirected: Optional[bool] = None) -> int:
        self.add_node(tail)
        self.add_node(head)
        edge_id = len(self._edges)
        capacity = capacity if is_infinite(capacity) else Fraction(capacity)
        self._edges.append(Edge(edge_id, tail, head, capacity, int(transit),
                                self.undirected if undirected is None else undirected))
        return edge_id

    def set_balance(self, node: str, balance):
        self.add_node(node)
        self._balances[node] = Fraction(balance)

    def add_commodity(self, balances: Mapping[str, object]) -> int:
        commodity_id = len(self._commodities)
        self._commodities.append(Commodity(
            commodity_id, {v: Fraction(b) for v, b in balances.items() if b != 0}))
        return commodity_id

    def build(self, horizon: Optional[int] = None, **metadata) -> NetworkOverTime:
        balances = {v: b for v, b in self._balances.items() if b != 0}
        return NetworkOverTime(tuple(self._nodes), tuple(self._edges), balances,
                               horizon, tuple(self._commodities), dict(metadata))


def validate(network: NetworkOverTime) -> List[str]:
    """Report every violated invariant; an empty list means the network is valid"""
    problems = []
    declared = set()
    for v in network.nodes:
        if not isinstance(v, str) or not v:
            problems.append(f"node id {v!r} is not a non-empty string")
        if v in declared:
            problems.append(f"duplicate node {v!r}")
        declared.add(v)

    for position, e in enumerate(network.edges):
        if e.id != position:
            problems.append(f"edge at position {position} has id {e.id}, ids must be dense")
        if e.tail not in declared or e.head not in declared:
            problems.append(f"edge {e.id} has an undeclared endpoint")
        if e.tail == e.head:
            problems.append(f"edge {e.id} is a loop at {e.tail!r}")
        if not is_infinite(e.capacity) and not (isinstance(e.capacity, Fraction) and e.capacity >= 0):
            problems.append(f"edge {e.id} capacity {e.capacity!r} is not a nonnegative rational or inf")
        if not isinstance(e.transit, int) or isinstance(e.transit, bool) or e.transit < 0:
            problems.append(f"edge {e.id} transit {e.transit!r} is not a nonnegative integer")

    for v, b in network.balances.items():
        if v not in declared:
            problems.append(f"balance given for undeclared node {v!r}")
        if not isinstance(b, Fraction):
            problems.append(f"balance of {v!r} is not rational")
    total = sum(network.balances.values(), Fraction(0))
    if total != 0:
        problems.append(f"balance sum ≠ 0 (is {format_rational(total)})")

    if network.horizon is not None and (not isinstance(network.horizon, int) or network.horizon < 0):
        problems.append(f"horizon {network.horizon!r} is not a nonnegative integer")

    for commodity in network.commodities:
        unknown = [v for v in commodity.balances if v not in declared]
        if unknown:
            problems.append(f"commodity {commodity.id} references undeclared nodes {unknown}")
        commodity_total = sum(commodity.balances.values(), Fraction(0))
        if commodity_total != 0:
            problems.append(f"commodity {commodity.id} balance sum ≠ 0 (is {format_rational(commodity_total)})")

    return problems


def ensure_valid(network: NetworkOverTime):
    problems = validate(network)
    if problems:
        raise ValidationError("; ".join(problems))


def canonical_direction(network: NetworkOverTime, edge: Edge) -> Tuple[str, str]:
    """Low node index -> high node index"""
    index = network.node_index
    if index[edge.tail] <= index[edge.head]:
        return (edge.tail, edge.head)
    return (edge.head, edge.tail)


def canonical_orientation(network: NetworkOverTime) -> Orientation:
    return {e.id: canonical_direction(network, e) for e in network.undirected_edges}


def orientation_from_bits(network: NetworkOverTime, bits: Sequence[int],
                          edge_ids: Optional[Sequence[int]] = None,
                          base: Optional[Orientation] = None) -> Orientation:
    """Bit 0 keeps the canonical direction of an edge, bit 1 reverses it"""
    edge_ids = [e.id for e in network.undirected_edges] if edge_ids is None else list(edge_ids)
    orientation = dict(canonical_orientation(network) if base is None else base)
    for edge_id, bit in zip(edge_ids, bits):
        v, w = canonical_direction(network, network.edges[edge_id])
        orientation[edge_id] = (w, v) if bit else (v, w)
    return orientation


def apply_orientation(network: NetworkOverTime, orientation: Mapping[int, Tuple[str, str]]) -> NetworkOverTime:
    """Direct every undirected edge as the orientation says; capacities and transits are kept"""
    edges = []
    known = {e.id for e in network.edges}
    foreign = [edge_id for edge_id in orientation if edge_id not in known]
    if foreign:
        raise ValidationError(f"orientation names unknown edges {sorted(foreign)}")
    for e in network.edges:
        if not e.undirected:
            if e.id in orientation and tuple(orientation[e.id]) != e.endpoints:
                raise ValidationError(f"edge {e.id} is directed {e.tail}>{e.head} and cannot be reoriented")
            edges.append(e)
            continue
        if e.id not in orientation:
            raise ValidationError(f"orientation is missing edge {e.id}")
        tail, head = orientation[e.id]
        if {tail, head} != {e.tail, e.head} or tail == head:
            raise ValidationError(f"orientation {tail}>{head} is not a direction of edge {e.id}")
        edges.append(replace(e, tail=tail, head=head, undirected=False))
    return replace(network, edges=tuple(edges))


class GadgetArcs(NamedTuple):
    """Arc ids of one edge inside the gadget network; None for directed edges"""
    middle: int
    enter_tail: Optional[int] = None
    enter_head: Optional[int] = None
    leave_tail: Optional[int] = None
    leave_head: Optional[int] = None


def fresh_name(base: str, taken: set) -> str:
    name = base
    while name in taken:
        name = f"_{name}"
    taken.add(name)
    return name


def gadget_layout(network: NetworkOverTime) -> Dict[int, GadgetArcs]:
    """Arc ids that gadget_transform assigns to each original edge"""
    layout = {}
    next_id = 0
    for e in network.edges:
        if e.undirected:
            layout[e.id] = GadgetArcs(middle=next_id + 2, enter_tail=next_id, enter_head=next_id + 1,
                                      leave_tail=next_id + 3, leave_head=next_id + 4)
            next_id += 5
        else:
            layout[e.id] = GadgetArcs(middle=next_id)
            next_id += 1
    return layout


def gadget_transform(network: NetworkOverTime) -> NetworkOverTime:
    """Replace each undirected edge {v,w} by nodes vw, vw' and arcs (v,vw),(w,vw),(vw,vw'),(vw',v),(vw',w)"""
    taken = set(network.nodes)
    nodes = list(network.nodes)
    edges: List[Edge] = []

    def arc(tail, head, capacity=INF, transit=0):
        edges.append(Edge(len(edges), tail, head, capacity, transit, False))

    for e in network.edges:
        if not e.undirected:
            arc(e.tail, e.head, e.capacity, e.transit)
            continue
        entry = fresh_name(f"{e.tail}~{e.head}#{e.id}", taken)
        exit_ = fresh_name(f"{e.tail}~{e.head}#{e.id}'", taken)
        nodes.extend([entry, exit_])
        arc(e.tail, entry)
        arc(e.head, entry)
        arc(entry, exit_, e.capacity, e.transit)
        arc(exit_, e.tail)
        arc(exit_, e.head)

    return replace(network, nodes=tuple(nodes), edges=tuple(edges))


def network_to_dict(network: NetworkOverTime) -> dict:
    data = {
        "nodes": list(network.nodes),
        "edges": [{
            "id": e.id,
            "tail": e.tail,
            "head": e.head,
            "undirected": e.undirected,
            "capacity": format_rational(e.capacity),
            "transit": e.transit,
        } for e in network.edges],
        "balances": {v: format_rational(network.balance(v)) for v in network.nodes if network.balance(v) != 0},
        "horizon": network.horizon,
    }
    if network.commodities:
        data["commodities"] = [{
            "id": c.id,
            "balances": {v: format_rational(b) for v, b in c.balances.items()},
        } for c in network.commodities]
    if network.metadata:
        data["metadata"] = dict(network.metadata)
    return data


def network_from_dict(data: dict) -> NetworkOverTime:
    """Parse the instance JSON object; raises ValidationError on malformed input"""
    try:
        nodes = tuple(data["nodes"])
        edges = []
        for position, raw in enumerate(data.get("edges", [])):
            transit = raw.get("transit", 0)
            if not isinstance(transit, int) or isinstance(transit, bool):
                raise ValidationError(f"edge {raw.get('id', position)}: transit must be an integer")
            edges.append(Edge(int(raw.get("id", position)), str(raw["tail"]), str(raw["head"]),
                              parse_rational(raw.get("capacity", "inf")), transit,
                              bool(raw.get("undirected", True))))
        balances = {v: parse_rational(b) for v, b in data.get("balances", {}).items()}
        commodities = tuple(
            Commodity(int(c.get("id", i)), {v: parse_rational(b) for v, b in c["balances"].items()})
            for i, c in enumerate(data.get("commodities") or []))
    except (KeyError, TypeError, ValueError, ZeroDivisionError) as e:
        raise ValidationError(f"malformed instance: {str(e)}") from e
    if any(is_infinite(b) for b in balances.values()):
        raise ValidationError("balances must be finite")
    network = NetworkOverTime(nodes, tuple(edges), {v: b for v, b in balances.items() if b != 0},
                              data.get("horizon"), commodities, dict(data.get("metadata") or {}))
    ensure_valid(network)
    return network


def load_network(path) -> NetworkOverTime:
    try:
        with open(path, encoding="utf-8") as handle:
            data = json.load(handle)
    except OSError as e:
        raise ValidationError(f"cannot read instance {path}: {str(e)}") from e
    except json.JSONDecodeError as e:
        raise ValidationError(f"{path}: not valid JSON ({str(e)})") from e
    logger.debug(f"Loaded instance from {path}")
    return network_from_dict(data)


def orientation_to_dict(orientation: Mapping[int, Tuple[str, str]]) -> Dict[str, List[str]]:
    return {str(edge_id): [tail, head] for edge_id, (tail, head) in sorted(orientation.items())}


def orientation_from_dict(data: Mapping[str, Sequence[str]]) -> Orientation:
    orientation = {}
    for key, value in data.items():
        if not isinstance(value, (list, tuple)) or len(value) != 2:
            raise ValidationError(f"orientation entry {key}: expected [tail, head], got {value!r}")
        try:
            edge_id = int(key)
        except ValueError as e:
            raise ValidationError(f"orientation key {key!r} is not an edge id") from e
        orientation[edge_id] = (str(value[0]), str(value[1]))
    return orientation


def orientation_label(orientation: Mapping[int, Tuple[str, str]]) -> str:
    """Short display form, one "tail>head" per edge in id order"""
    return ", ".join(f"{tail}>{head}" for _, (tail, head) in sorted(orientation.items()))
