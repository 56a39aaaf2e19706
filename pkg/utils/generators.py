"""
Instance Generators
Parameterized network families with known orientation prices, plus random instances
"""

import logging
from fractions import Fraction
from pathlib import Path
from typing import Dict, Optional
import sys

import numpy as np

sys.path.append(str(Path(__file__).parent.parent))
from utils.exceptions import PreconditionError
from utils.helpers import INF, format_rational
from utils.network_model import NetworkBuilder, NetworkOverTime, ensure_valid

logger = logging.getLogger(__name__)


def _params(**params) -> dict:
    """JSON-friendly echo of generator parameters"""
    return {key: value if isinstance(value, int) else format_rational(value)
            for key, value in params.items()}


def _integral(value: Fraction, what: str) -> int:
    if Fraction(value).denominator != 1:
        raise PreconditionError(f"{what} must be an integer, got {format_rational(value)}")
    return int(value)


def _finish(builder: NetworkBuilder, horizon: Optional[int], family: str, **params) -> NetworkOverTime:
    network = builder.build(horizon, family=family, params=_params(**params))
    ensure_valid(network)
    logger.debug(f"Generated {family} with {network.n} nodes and {network.m} edges")
    return network


def gen_fig1(T: int) -> NetworkOverTime:
    """Two sources and one sink where the undirected optimum uses {i, j} both ways"""
    if T < 2:
        raise PreconditionError(f"fig1 needs T >= 2, got {T}")
    g = NetworkBuilder()
    g.add_node("s1", 1)
    g.add_node("s2", 1)
    g.add_nodes("i", "j")
    g.add_node("t", -2)
    g.add_edge("s1", "i", 1, 0)
    g.add_edge("s2", "j", Fraction(1, T), 0)
    g.add_edge("j", "i", 1, 0)
    g.add_edge("j", "t", 1, T - 1)
    g.add_edge("t", "i", Fraction(1, T), 0)
    return _finish(g, T, "fig1", T=T)


def _lb_transits(T: int, delta) -> tuple:
    delta = Fraction(delta)
    if T < 1 or not (0 < delta < 1):
        raise PreconditionError(f"need T >= 1 and 0 < delta < 1, got T={T}, delta={format_rational(delta)}")
    short = _integral(delta * T, "delta*T")
    long = _integral((1 - delta) * T, "(1-delta)*T")
    return delta, short, long


def gen_flow_price_lb(T: int, delta, eps) -> NetworkOverTime:
    """Three sources and three sinks where every orientation sends about B/3"""
    delta, short, long = _lb_transits(T, delta)
    eps = _integral(Fraction(eps), "eps")
    if eps < 1 or eps > short:
        raise PreconditionError(f"need 1 <= eps <= delta*T = {short}, got {eps}")
    unit = Fraction(1, T)
    g = NetworkBuilder()
    for source in ("s1", "s2", "s3"):
        g.add_node(source, 1)
    for sink in ("t1", "t2", "t3"):
        g.add_node(sink, -1)
    g.add_nodes("v1", "v2", "v3", "v4")
    g.add_edge("s3", "v2", unit)
    g.add_edge("s2", "v1")
    g.add_edge("v1", "v2")
    g.add_edge("v2", "v4", INF, long)
    g.add_edge("v1", "v4", unit)
    g.add_edge("s1", "v3", INF, T)
    g.add_edge("v3", "v4")
    g.add_edge("v4", "t3")
    g.add_edge("v3", "t2", INF, short)
    g.add_edge("v3", "t1", unit)
    return _finish(g, T + eps, "flow-lb", T=T, delta=delta, eps=eps)


def gen_single_sink_lb(T: int, delta) -> NetworkOverTime:
    """Two sources feeding v4, which demands both supplies"""
    delta, short, long = _lb_transits(T, delta)
    unit = Fraction(1, T)
    g = NetworkBuilder()
    g.add_node("s2", 1)
    g.add_node("s3", 1)
    g.add_nodes("v1", "v2")
    g.add_node("v4", -2)
    g.add_edge("s3", "v2", unit)
    g.add_edge("s2", "v1")
    g.add_edge("v1", "v2")
    g.add_edge("v2", "v4", INF, long)
    g.add_edge("v1", "v4", unit)
    return _finish(g, T, "single-sink-lb", T=T, delta=delta)


def gen_single_source_lb(T: int, delta) -> NetworkOverTime:
    """Time reversal of the single-sink instance: s supplies 2, v3 and v4 demand 1 each"""
    delta, short, long = _lb_transits(T, delta)
    unit = Fraction(1, T)
    g = NetworkBuilder()
    g.add_node("s", 2)
    g.add_nodes("v1", "v2")
    g.add_node("v3", -1)
    g.add_node("v4", -1)
    g.add_edge("s", "v2", unit)
    g.add_edge("v1", "v2")
    g.add_edge("s", "v1", INF, long)
    g.add_edge("v2", "v3")
    g.add_edge("v1", "v4", unit)
    return _finish(g, T, "single-source-lb", T=T, delta=delta)


def _time_price_checks(k: int, T: int):
    if k < 1 or T < 1:
        raise PreconditionError(f"need k >= 1 and T >= 1, got k={k}, T={T}")


def _time_price_spine(g: NetworkBuilder, k: int, T: int):
    """v_0 ... v_k joined by transit-T edges, each inner v_i with its w_i"""
    for i in range(1, k + 1):
        g.add_edge(f"v{i - 1}", f"v{i}", INF, T)
    g.add_edge(f"v{k}", f"t{k}")


def gen_time_price_single_sink(k: int, T: int) -> NetworkOverTime:
    _time_price_checks(k, T)
    n = 4 * k + 1
    scale = n * T
    g = NetworkBuilder()
    g.add_node("s0", 1)
    g.add_edge("s0", "v0")
    _time_price_spine(g, k, T)
    g.add_edge(f"t{k}", "t")
    total = Fraction(1)
    for i in range(1, k):
        g.add_node(f"s{i}", scale ** i)
        total += scale ** i
        g.add_edge(f"s{i}", f"w{i}")
        g.add_edge(f"t{i}", f"w{i}", scale ** (i - 1))
        g.add_edge(f"w{i}", f"v{i}")
        g.add_edge(f"t{i}", "t")
    g.set_balance("t", -total)
    return _finish(g, None, "time-lb-sink", k=k, T=T)


def gen_time_price_single_source(k: int, T: int) -> NetworkOverTime:
    """Mirror of the single-sink family around a super source s"""
    _time_price_checks(k, T)
    n = 4 * k + 1
    scale = n * T
    g = NetworkBuilder()
    g.add_node("s")
    g.add_edge("s", "s0")
    g.add_edge("s0", "v0")
    _time_price_spine(g, k, T)
    g.set_balance(f"t{k}", -1)
    total = Fraction(1)
    for i in range(1, k):
        g.add_edge(f"s{i}", f"w{i}", scale ** (k - 1 - i))
        g.add_edge(f"t{i}", f"w{i}")
        g.add_edge(f"w{i}", f"v{i}")
        g.add_edge("s", f"s{i}")
        g.set_balance(f"t{i}", -scale ** (k - i))
        total += scale ** (k - i)
    g.set_balance("s", total)
    return _finish(g, None, "time-lb-source", k=k, T=T)


def gen_time_price_tree(k: int, T: int) -> NetworkOverTime:
    """Single-sink family without t; each t_i keeps its own demand"""
    _time_price_checks(k, T)
    n = 4 * k + 1
    scale = n * T
    g = NetworkBuilder()
    g.add_node("s0", 1)
    g.add_edge("s0", "v0")
    _time_price_spine(g, k, T)
    g.set_balance(f"t{k}", -scale ** (k - 1))
    for i in range(1, k):
        g.add_node(f"s{i}", scale ** i)
        g.add_edge(f"s{i}", f"w{i}")
        g.add_edge(f"t{i}", f"w{i}", scale ** (i - 1))
        g.add_edge(f"w{i}", f"v{i}")
        g.set_balance(f"t{i}", -scale ** (i - 1))
    return _finish(g, None, "time-lb-tree", k=k, T=T)


def gen_unit_capacity_tree(k: int, T: int) -> NetworkOverTime:
    """Chain of k blocks; source s_{i+1} and sink t_i meet at b_i"""
    _time_price_checks(k, T)
    g = NetworkBuilder()
    g.add_node("s1", 1)
    if k == 1:
        g.add_node("t1", -1)
        g.add_edge("s1", "t1", 1, T)
        return _finish(g, None, "unit-tree", k=k, T=T)
    g.add_edge("s1", "a1", 1, T)
    for i in range(1, k):
        g.add_edge(f"a{i}", f"b{i}", 1)
        g.add_node(f"t{i}", -1)
        g.add_edge(f"b{i}", f"t{i}", 1)
        g.add_node(f"s{i + 1}", 1)
        g.add_edge(f"s{i + 1}", f"b{i}", 1)
        if i < k - 1:
            g.add_edge(f"a{i}", f"a{i + 1}", 1, T)
    g.add_node(f"t{k}", -1)
    g.add_edge(f"a{k - 1}", f"t{k}", 1, T)
    return _finish(g, None, "unit-tree", k=k, T=T)


def gen_eaf(U, T: int) -> NetworkOverTime:
    """Single s-t instance without an earliest arrival contraflow; horizon 3T"""
    if T < 2 or T % 2:
        raise PreconditionError(f"eaf needs an even T >= 2, got {T}")
    U = Fraction(U)
    if U < 1:
        raise PreconditionError(f"eaf needs U >= 1, got {format_rational(U)}")
    supply = 3 * T * (U + 1)
    g = NetworkBuilder()
    g.add_node("s", supply)
    g.add_nodes("v1", "v2")
    g.add_node("t", -supply)
    g.add_edge("s", "v2", U, T // 2)
    g.add_edge("s", "v1", 1, 1)
    g.add_edge("v1", "v2", U, 0)
    g.add_edge("v2", "t", 1, 1)
    g.add_edge("v1", "t", U, T // 2)
    network = _finish(g, 3 * T, "eaf", U=U, T=T)
    return network


def random_network(seed: int, n: int = 6, m: int = 8, sources: int = 1, sinks: int = 1,
                   max_capacity: int = 3, max_transit: int = 3, max_supply: int = 3,
                   horizon: Optional[int] = 6, undirected: bool = True) -> NetworkOverTime:
    """Integer random instance; the same seed always gives the same network"""
    if n < 2 or sources < 1 or sinks < 1 or sources + sinks > n:
        raise PreconditionError(f"cannot place {sources} sources and {sinks} sinks on {n} nodes")
    rng = np.random.default_rng(seed)
    nodes = [f"v{i}" for i in range(n)]
    chosen = rng.permutation(n)
    supplies = rng.integers(1, max_supply + 1, size=sources)
    total = int(supplies.sum())
    while total < sinks:
        supplies[0] += 1
        total += 1
    cuts = sorted(rng.choice(np.arange(1, total), size=sinks - 1, replace=False).tolist()) if sinks > 1 else []
    demands = [b - a for a, b in zip([0] + cuts, cuts + [total])]

    g = NetworkBuilder(undirected=undirected)
    g.add_nodes(*nodes)
    for position, supply in zip(chosen[:sources], supplies):
        g.set_balance(nodes[position], int(supply))
    for position, demand in zip(chosen[sources:sources + sinks], demands):
        g.set_balance(nodes[position], -demand)
    for _ in range(m):
        tail, head = rng.choice(n, size=2, replace=False)
        g.add_edge(nodes[tail], nodes[head], int(rng.integers(1, max_capacity + 1)),
                   int(rng.integers(0, max_transit + 1)))
    return _finish(g, horizon, "random", seed=seed, n=n, m=m, sources=sources, sinks=sinks)


# name -> (builder, ordered parameter names)
FAMILIES: Dict[str, tuple] = {
    "fig1": (gen_fig1, ["T"]),
    "flow-lb": (gen_flow_price_lb, ["T", "delta", "eps"]),
    "single-sink-lb": (gen_single_sink_lb, ["T", "delta"]),
    "single-source-lb": (gen_single_source_lb, ["T", "delta"]),
    "time-lb-sink": (gen_time_price_single_sink, ["k", "T"]),
    "time-lb-source": (gen_time_price_single_source, ["k", "T"]),
    "time-lb-tree": (gen_time_price_tree, ["k", "T"]),
    "unit-tree": (gen_unit_capacity_tree, ["k", "T"]),
    "eaf": (gen_eaf, ["U", "T"]),
    "random": (random_network, ["seed", "n", "m", "sources", "sinks"]),
}


def build_family(family: str, **params) -> NetworkOverTime:
    """Call a registered builder with the parameters it takes; missing ones keep defaults"""
    if family not in FAMILIES:
        raise PreconditionError(f"unknown family {family!r}")
    builder, names = FAMILIES[family]
    chosen = {name: params[name] for name in names if params.get(name) is not None}
    try:
        return builder(**chosen)
    except TypeError as e:
        raise PreconditionError(f"{family}: {str(e)}") from e
