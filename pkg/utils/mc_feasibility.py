"""
Multicommodity Feasibility
Exact rational simplex and the zero-transit multicommodity flow oracle
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple
import sys

import networkx as nx

sys.path.append(str(Path(__file__).parent.parent))
from config.settings import SOLVER_SETTINGS
from utils.exceptions import PreconditionError
from utils.helpers import INF, is_infinite
from utils.network_model import Commodity, NetworkOverTime, gadget_transform

logger = logging.getLogger(__name__)


class SimplexTableau:
    """Slack form x_B = b - A x_N, objective v + c x_N, maximized with Bland's rule"""

    def __init__(self, A: List[List[Fraction]], b: List[Fraction], c: List[Fraction]):
        self.m = len(b)
        self.n = len(c)
        self.A = [[Fraction(a) for a in row] for row in A]
        self.b = [Fraction(v) for v in b]
        self.c = [Fraction(v) for v in c]
        self.value = Fraction(0)
        self.nb_vars = list(range(self.n))
        self.b_vars = list(range(self.n, self.n + self.m))
        self.pivots = 0

    def pivot(self, i: int, j: int):
        piv = self.A[i][j]
        delta = self.c[j] / piv
        self.value += delta * self.b[i]
        row = self.A[i]
        for l in range(self.n):
            self.c[l] -= delta * row[l]
        self.c[j] = -delta
        for l in range(self.n):
            row[l] = 1 / piv if l == j else row[l] / piv
        self.b[i] /= piv
        for k in range(self.m):
            if k == i:
                continue
            f = self.A[k][j]
            if f == 0:
                continue
            other = self.A[k]
            for l in range(self.n):
                other[l] = -f / piv if l == j else other[l] - f * row[l]
            self.b[k] -= f * self.b[i]
        self.nb_vars[j], self.b_vars[i] = self.b_vars[i], self.nb_vars[j]
        self.pivots += 1

    def bland_primal_step(self) -> str:
        try:
            _, j = min((self.nb_vars[j], j) for j in range(self.n) if self.c[j] > 0)
        except ValueError:
            return "optimal"
        try:
            _, _, i = min((self.b[i] / self.A[i][j], self.b_vars[i], i)
                          for i in range(self.m) if self.A[i][j] > 0)
        except ValueError:
            return "unbounded"
        self.pivot(i, j)
        return "go_on"

    def bland_primal(self) -> str:
        while True:
            status = self.bland_primal_step()
            if status in ("optimal", "unbounded"):
                return status

    def solution(self, count: int) -> List[Fraction]:
        x = [Fraction(0)] * count
        for i, var in enumerate(self.b_vars):
            if var < count:
                x[var] = self.b[i]
        return x


@dataclass
class LpResult:
    status: str  # "optimal", "infeasible" or "unbounded"
    value: Optional[Fraction] = None
    x: List[Fraction] = field(default_factory=list)


def solve_lp(A: Sequence[Sequence[Fraction]], b: Sequence[Fraction], c: Sequence[Fraction]) -> LpResult:
    """max c x subject to A x <= b, x >= 0, exactly, in two phases"""
    m, n = len(b), len(c)
    if m == 0:
        if any(v > 0 for v in c):
            return LpResult("unbounded")
        return LpResult("optimal", Fraction(0), [Fraction(0)] * n)

    if min(b) >= 0:
        tableau = SimplexTableau([list(row) for row in A], list(b), list(c))
    else:
        # auxiliary x0 (label n + m) relaxes every row until phase one drives it to zero
        aux = n + m
        tableau = SimplexTableau([list(row) + [Fraction(-1)] for row in A], list(b),
                                 [Fraction(0)] * n + [Fraction(-1)])
        tableau.nb_vars[n] = aux
        tableau.b_vars = list(range(n, n + m))
        tableau.pivot(min(range(m), key=lambda i: (tableau.b[i], i)), n)
        tableau.bland_primal()
        if tableau.value < 0:
            return LpResult("infeasible")
        if aux in tableau.b_vars:
            i = tableau.b_vars.index(aux)
            j = next((j for j in range(tableau.n) if tableau.A[i][j] != 0), None)
            if j is not None:
                tableau.pivot(i, j)
        drop = tableau.nb_vars.index(aux) if aux in tableau.nb_vars else None
        if drop is not None:
            for row in tableau.A:
                del row[drop]
            del tableau.nb_vars[drop]
            tableau.n -= 1
        # original objective in terms of the current nonbasic variables
        costs = [Fraction(0)] * tableau.n
        value = Fraction(0)
        position = {var: j for j, var in enumerate(tableau.nb_vars)}
        for var in range(n):
            if c[var] == 0:
                continue
            if var in position:
                costs[position[var]] += c[var]
            else:
                i = tableau.b_vars.index(var)
                value += c[var] * tableau.b[i]
                for j in range(tableau.n):
                    costs[j] -= c[var] * tableau.A[i][j]
        tableau.c = costs
        tableau.value = value

    status = tableau.bland_primal()
    logger.debug(f"Simplex finished after {tableau.pivots} pivots ({status})")
    if status == "unbounded":
        return LpResult("unbounded")
    return LpResult("optimal", tableau.value, tableau.solution(n))


def _zero_transit_view(network: NetworkOverTime) -> NetworkOverTime:
    if any(e.transit != 0 for e in network.edges):
        raise PreconditionError("multicommodity oracle needs zero transit times on every edge")
    return network if network.is_directed else gadget_transform(network)


def _commodity_edges(network: NetworkOverTime, commodity: Commodity) -> List[int]:
    """Edges that lie on some source-sink path of the commodity"""
    graph = nx.MultiDiGraph()
    graph.add_nodes_from(network.nodes)
    for e in network.edges:
        if is_infinite(e.capacity) or e.capacity > 0:
            graph.add_edge(e.tail, e.head)
    sources = [v for v, b in commodity.balances.items() if b > 0]
    sinks = [v for v, b in commodity.balances.items() if b < 0]
    reach = set(sources).union(*(nx.descendants(graph, v) for v in sources)) if sources else set()
    coreach = set(sinks).union(*(nx.ancestors(graph, v) for v in sinks)) if sinks else set()
    return [e.id for e in network.edges
            if (is_infinite(e.capacity) or e.capacity > 0) and e.tail in reach and e.head in coreach]


def _can_deliver(network: NetworkOverTime, commodity: Commodity, edges: List[int]) -> bool:
    if commodity.supply == 0:
        return True
    sinks = {v for v, b in commodity.balances.items() if b < 0}
    return any(network.edges[e].head in sinks for e in edges)


class _McModel:
    """Rows of the multicommodity LP; column order is (commodity, edge) pairs then lambda"""

    def __init__(self, network: NetworkOverTime, commodities: Sequence[Commodity], scale=1):
        self.network = network
        self.commodities = list(commodities)
        self.scale = Fraction(scale)
        self.columns: List[Tuple[int, int]] = []
        self.edge_sets = []
        for i, commodity in enumerate(self.commodities):
            edges = _commodity_edges(network, commodity)
            self.edge_sets.append(edges)
            self.columns.extend((i, e) for e in edges)
        self.position = {col: j for j, col in enumerate(self.columns)}
        self.reachable = [_can_deliver(network, c, edges) for c, edges in zip(self.commodities, self.edge_sets)]

    def rows(self, lam: Optional[Fraction]):
        """A x <= b rows; lam None adds lambda as the last column"""
        width = len(self.columns) + (1 if lam is None else 0)
        A: List[List[Fraction]] = []
        b: List[Fraction] = []

        def row():
            return [Fraction(0)] * width

        by_edge: Dict[int, List[int]] = {}
        for j, (_, e) in enumerate(self.columns):
            by_edge.setdefault(e, []).append(j)
        for e, cols in sorted(by_edge.items()):
            capacity = self.network.edges[e].capacity
            if is_infinite(capacity):
                continue
            r = row()
            for j in cols:
                r[j] = Fraction(1)
            A.append(r)
            b.append(capacity * self.scale)

        for i, commodity in enumerate(self.commodities):
            touched = set()
            for e in self.edge_sets[i]:
                touched.add(self.network.edges[e].tail)
                touched.add(self.network.edges[e].head)
            net_out = {v: row() for v in touched}
            for e in self.edge_sets[i]:
                edge = self.network.edges[e]
                net_out[edge.tail][self.position[(i, e)]] += 1
                net_out[edge.head][self.position[(i, e)]] -= 1
            for v in sorted(touched, key=self.network.node_index.get):
                balance = commodity.balances.get(v, Fraction(0))
                out = net_out[v]
                negated = [-a for a in out]
                if balance > 0:
                    A.extend([out, negated])
                    b.extend([balance, Fraction(0)])
                elif balance < 0:
                    A.extend([out, negated])
                    b.extend([Fraction(0), -balance])
                else:
                    A.extend([out, negated])
                    b.extend([Fraction(0), Fraction(0)])

            demand = commodity.supply
            if demand == 0:
                continue
            # lambda * demand - delivered <= 0, delivered = net inflow at the sinks
            delivered = row()
            for v, balance in commodity.balances.items():
                if balance < 0 and v in net_out:
                    for j, a in enumerate(net_out[v]):
                        delivered[j] -= a
            r = [-a for a in delivered]
            if lam is None:
                r[-1] = demand
                A.append(r)
                b.append(Fraction(0))
            else:
                A.append(r)
                b.append(-lam * demand)

        if lam is None:
            r = row()
            r[-1] = Fraction(1)
            A.append(r)
            b.append(Fraction(1))
        return A, b


def static_mc_feasibility(network: NetworkOverTime, lam, commodities: Optional[Sequence[Commodity]] = None,
                          scale=1) -> bool:
    """Whether every commodity can route lam times its demand under shared capacities (times scale)"""
    lam = Fraction(lam)
    if not (0 <= lam <= 1):
        raise PreconditionError(f"lambda must lie in [0, 1], got {lam}")
    commodities = network.commodities if commodities is None else commodities
    view = _zero_transit_view(network)
    model = _McModel(view, commodities, scale)
    if lam > 0 and not all(model.reachable):
        logger.debug("Some commodity cannot reach any of its sinks")
        return False
    A, b = model.rows(lam)
    result = solve_lp(A, b, [Fraction(0)] * len(model.columns))
    return result.status == "optimal"


def max_concurrent_value(network: NetworkOverTime, commodities: Optional[Sequence[Commodity]] = None,
                         scale=1) -> Fraction:
    """Largest lambda in [0, 1] for which static_mc_feasibility holds"""
    commodities = network.commodities if commodities is None else commodities
    view = _zero_transit_view(network)
    model = _McModel(view, commodities, scale)
    if not all(model.reachable):
        return Fraction(0)
    A, b = model.rows(None)
    c = [Fraction(0)] * len(model.columns) + [Fraction(1)]
    result = solve_lp(A, b, c)
    if result.status != "optimal":
        return Fraction(0)
    return result.value


def mc_quickest_feasible(network: NetworkOverTime, T: int,
                         commodities: Optional[Sequence[Commodity]] = None) -> bool:
    """Zero transit: all demands within horizon T iff static routing with capacities times T"""
    if T < 1:
        return all(c.supply == 0 for c in (network.commodities if commodities is None else commodities))
    return static_mc_feasibility(network, 1, commodities, scale=T)


def mc_quickest_time(network: NetworkOverTime, max_T: Optional[int] = None,
                     commodities: Optional[Sequence[Commodity]] = None):
    """Minimal integer horizon for all demands, INF when none up to max_T works"""
    max_T = SOLVER_SETTINGS["max_horizon"] if max_T is None else max_T
    if not mc_quickest_feasible(network, max_T, commodities):
        return INF
    if mc_quickest_feasible(network, 0, commodities):
        return 0
    lo, hi = 0, max_T
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if mc_quickest_feasible(network, mid, commodities):
            hi = mid
        else:
            lo = mid
    return hi
