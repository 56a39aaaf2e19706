"""
Static Flow Module
Deterministic successive shortest paths with transit times as costs
"""

import heapq
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Tuple
import sys

sys.path.append(str(Path(__file__).parent.parent))
from utils.exceptions import ConservationError, PreconditionError, UnboundedFlowError, ValidationError
from utils.helpers import INF, is_infinite
from utils.network_model import GadgetArcs, NetworkOverTime

logger = logging.getLogger(__name__)

StaticFlow = Dict[int, Fraction]


@dataclass
class PathDecomposition:
    """Paths as edge-id tuples with their rates, in extraction order"""
    paths: List[Tuple[Tuple[int, ...], Fraction]] = field(default_factory=list)
    cycles: List[Tuple[Tuple[int, ...], Fraction]] = field(default_factory=list)

    def transit(self, network: NetworkOverTime, path: Sequence[int]) -> int:
        return sum(network.edges[edge_id].transit for edge_id in path)

    def __len__(self):
        return len(self.paths)

    def __iter__(self):
        return iter(self.paths)


class ResidualArc:
    """Forward arc of an edge or its reverse; reverse arcs carry the negated cost"""

    def __init__(self, edge_id: int, tail: int, head: int, capacity, cost: int, reverse: bool):
        self.edge_id = edge_id
        self.tail = tail
        self.head = head
        self.capacity = capacity
        self.cost = cost
        self.reverse = reverse
        self.flow = Fraction(0)
        self.twin: Optional["ResidualArc"] = None

    @property
    def residual(self):
        if self.reverse:
            return self.twin.flow
        return self.capacity - self.flow


class ResidualGraph:
    """Residual graph of a directed network; adjacency lists are ordered forward
    arcs by ascending edge id, then reverse arcs by ascending edge id"""

    def __init__(self, network: NetworkOverTime):
        if not network.is_directed:
            raise ValidationError("static flow machinery expects a directed network (apply the gadget first)")
        self.network = network
        self.index = network.node_index
        self.forward: List[ResidualArc] = []
        forward_adj: List[List[ResidualArc]] = [[] for _ in network.nodes]
        reverse_adj: List[List[ResidualArc]] = [[] for _ in network.nodes]
        for e in network.edges:
            tail, head = self.index[e.tail], self.index[e.head]
            arc = ResidualArc(e.id, tail, head, e.capacity, e.transit, False)
            back = ResidualArc(e.id, head, tail, Fraction(0), -e.transit, True)
            arc.twin, back.twin = back, arc
            self.forward.append(arc)
            forward_adj[tail].append(arc)
            reverse_adj[head].append(back)
        self.adjacency = [forward_adj[v] + reverse_adj[v] for v in range(len(network.nodes))]
        self.potential = [0] * len(network.nodes)

    def flow(self) -> StaticFlow:
        return {arc.edge_id: arc.flow for arc in self.forward}

    def distances(self, source: int) -> List:
        """Dijkstra on reduced costs (nonnegative while potentials are maintained)"""
        dist = [INF] * len(self.adjacency)
        dist[source] = 0
        heap = [(0, source)]
        while heap:
            d, v = heapq.heappop(heap)
            if d > dist[v]:
                continue
            for arc in self.adjacency[v]:
                if arc.residual <= 0:
                    continue
                reduced = arc.cost + self.potential[v] - self.potential[arc.head]
                candidate = d + reduced
                if candidate < dist[arc.head]:
                    dist[arc.head] = candidate
                    heapq.heappush(heap, (candidate, arc.head))
        return dist

    def tight_path(self, source: int, sink: int, dist: List) -> Optional[List[ResidualArc]]:
        """First source-sink path of the depth-first search over tight residual arcs"""
        if is_infinite(dist[sink]):
            return None
        visited = {source}
        stack = [(source, iter(self.adjacency[source]))]
        path: List[ResidualArc] = []
        while stack:
            v, arcs = stack[-1]
            advanced = False
            for arc in arcs:
                w = arc.head
                if w in visited or arc.residual <= 0 or is_infinite(dist[w]):
                    continue
                if dist[v] + arc.cost + self.potential[v] - self.potential[w] != dist[w]:
                    continue
                visited.add(w)
                path.append(arc)
                if w == sink:
                    return path
                stack.append((w, iter(self.adjacency[w])))
                advanced = True
                break
            if not advanced:
                stack.pop()
                if path:
                    path.pop()
        return None

    def augment(self, path: Sequence[ResidualArc], amount):
        for arc in path:
            if arc.reverse:
                arc.twin.flow -= amount
            else:
                arc.flow += amount

    def update_potentials(self, dist: List):
        for v, d in enumerate(dist):
            if not is_infinite(d):
                self.potential[v] += d


def _node_position(network: NetworkOverTime, node: str) -> int:
    if node not in network.node_index:
        raise ValidationError(f"node {node!r} is not in the network")
    return network.node_index[node]


def shortest_path_deterministic(network: NetworkOverTime, source: str, sink: str) -> Optional[List[int]]:
    """Shortest path by transit time; ties broken by the ascending-id depth-first search"""
    s, t = _node_position(network, source), _node_position(network, sink)
    graph = ResidualGraph(network)
    dist = graph.distances(s)
    path = graph.tight_path(s, t, dist)
    if path is None:
        return None
    return [arc.edge_id for arc in path]


def max_temporally_repeated_static_flow(network: NetworkOverTime, source: str, sink: str,
                                        T: int) -> StaticFlow:
    """Static flow maximizing T|x| - sum tau_e x_e by successive shortest paths"""
    if T < 0:
        raise PreconditionError(f"horizon must be nonnegative, got {T}")
    s, t = _node_position(network, source), _node_position(network, sink)
    graph = ResidualGraph(network)
    augmentations = 0
    while True:
        dist = graph.distances(s)
        if is_infinite(dist[t]):
            break
        length = dist[t] + graph.potential[t] - graph.potential[s]
        if length >= T:
            break
        path = graph.tight_path(s, t, dist)
        bottleneck = min(arc.residual for arc in path)
        if is_infinite(bottleneck):
            raise UnboundedFlowError(f"path of length {length} < {T} has infinite capacity")
        graph.augment(path, bottleneck)
        graph.update_potentials(dist)
        augmentations += 1
        logger.debug(f"Augmented {bottleneck} along a path of length {length}")
    logger.debug(f"Successive shortest paths finished after {augmentations} augmentations")
    return graph.flow()


def flow_value(flow: Mapping[int, Fraction], network: NetworkOverTime, source: str) -> Fraction:
    """|x|: net flow leaving the source"""
    value = Fraction(0)
    for e in network.edges:
        if e.tail == source:
            value += flow.get(e.id, 0)
        if e.head == source:
            value -= flow.get(e.id, 0)
    return value


def static_objective(flow: Mapping[int, Fraction], network: NetworkOverTime, source: str, T: int) -> Fraction:
    """T|x| - sum tau_e x_e"""
    cost = sum((e.transit * flow.get(e.id, 0) for e in network.edges), Fraction(0))
    return T * flow_value(flow, network, source) - cost


def check_conservation(flow: Mapping[int, Fraction], network: NetworkOverTime,
                       terminals: Sequence[str] = ()) -> List[str]:
    problems = []
    net = {v: Fraction(0) for v in network.nodes}
    for e in network.edges:
        x = flow.get(e.id, 0)
        if x < 0 or (not is_infinite(e.capacity) and x > e.capacity):
            problems.append(f"edge {e.id} carries {x} outside [0, {e.capacity}]")
        net[e.tail] -= x
        net[e.head] += x
    for v, excess in net.items():
        if v not in terminals and excess != 0:
            problems.append(f"conservation violated at {v!r} by {excess}")
    return problems


def _dfs_flow_path(start: str, goal: Optional[str], remaining: Dict[int, Fraction],
                   out_arcs: Dict[str, List[int]], network: NetworkOverTime) -> Optional[List[int]]:
    """Depth-first search on positive-flow arcs in ascending id order; goal None finds a cycle"""
    visited = {start}
    stack = [(start, iter(out_arcs[start]))]
    path: List[int] = []
    while stack:
        v, arcs = stack[-1]
        advanced = False
        for edge_id in arcs:
            if remaining[edge_id] <= 0:
                continue
            w = network.edges[edge_id].head
            if goal is None and w == start:
                return path + [edge_id]
            if w in visited:
                continue
            visited.add(w)
            path.append(edge_id)
            if w == goal:
                return path
            stack.append((w, iter(out_arcs[w])))
            advanced = True
            break
        if not advanced:
            stack.pop()
            if path:
                path.pop()
    return None


def path_decomposition(flow: Mapping[int, Fraction], network: NetworkOverTime,
                       source: str, sink: str) -> PathDecomposition:
    """Repeatedly extract the depth-first source-sink path and remove its bottleneck"""
    problems = check_conservation(flow, network, terminals=(source, sink))
    if problems:
        raise ConservationError("; ".join(problems))
    remaining = {e.id: Fraction(flow.get(e.id, 0)) for e in network.edges}
    out_arcs: Dict[str, List[int]] = {v: [] for v in network.nodes}
    for e in network.edges:
        out_arcs[e.tail].append(e.id)

    decomposition = PathDecomposition()
    while True:
        path = _dfs_flow_path(source, sink, remaining, out_arcs, network)
        if path is None:
            break
        rate = min(remaining[edge_id] for edge_id in path)
        for edge_id in path:
            remaining[edge_id] -= rate
        decomposition.paths.append((tuple(path), rate))

    # what is left is a circulation
    for v in network.nodes:
        while True:
            cycle = _dfs_flow_path(v, None, remaining, out_arcs, network)
            if cycle is None:
                break
            rate = min(remaining[edge_id] for edge_id in cycle)
            for edge_id in cycle:
                remaining[edge_id] -= rate
            decomposition.cycles.append((tuple(cycle), rate))
    if decomposition.cycles:
        logger.debug(f"Decomposition left {len(decomposition.cycles)} cycles")
    return decomposition


def cancel_opposing_gadget_flow(flow: Mapping[int, Fraction],
                                layout: Mapping[int, GadgetArcs]) -> StaticFlow:
    """Net opposite use of each gadget into one direction; value and cost are unchanged
    when the edge has zero transit"""
    result = dict(flow)
    for arcs in layout.values():
        if arcs.enter_tail is None:
            continue
        a, b = result[arcs.enter_tail], result[arcs.enter_head]
        c, d = result[arcs.leave_tail], result[arcs.leave_head]
        if b == 0 and c == 0 or a == 0 and d == 0:
            continue
        if a >= c:
            a, c, d, b = a - c, Fraction(0), d - b, Fraction(0)
        else:
            b, d, c, a = b - d, Fraction(0), c - a, Fraction(0)
        result[arcs.enter_tail], result[arcs.enter_head] = a, b
        result[arcs.leave_tail], result[arcs.leave_head] = c, d
        result[arcs.middle] = a + b
    return result
