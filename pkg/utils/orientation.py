"""
Orientation Engine
Brute-force orientation oracles, price of orientation, the capacity fixed point,
the bicriteria algorithm and arrival-pattern approximation checks
"""

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union
import sys

sys.path.append(str(Path(__file__).parent.parent))
from config.settings import ORACLE_CAPS, ORIENTATION_SETTINGS
from utils.exceptions import (
    BidirectionalFlowError, CapExceededError, ConvergenceError, InfeasibleError,
    PreconditionError, ValidationError
)
from utils.helpers import INF, format_rational, is_infinite, parallel_map
from utils.network_model import (
    Edge, GadgetArcs, NetworkOverTime, Orientation, apply_orientation,
    canonical_direction, ensure_valid, fresh_name, gadget_layout, gadget_transform,
    orientation_from_bits, orientation_to_dict
)
from utils.static_flow import (
    PathDecomposition, StaticFlow, cancel_opposing_gadget_flow, max_temporally_repeated_static_flow
)
from utils.temporal_flow import (
    FlowOverTime, TemporallyRepeatedFlow, check_feasibility, earliest_arrival_pattern,
    flow_value_at, max_flow_over_time, max_flow_value, quickest_transshipment_time,
    temporally_repeated_from_static
)

logger = logging.getLogger(__name__)

Curve = Union[FlowOverTime, Mapping[int, Fraction]]


# ---------------------------------------------------------------------------
# Brute force and price of orientation
# ---------------------------------------------------------------------------

@dataclass
class PriceReport:
    kind: str  # "flow" or "time"
    undirected: object
    oriented: object
    orientation: Orientation
    ratio: object
    horizon: Optional[int] = None
    evaluated: int = 0

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "horizon": self.horizon,
            "undirected": format_rational(self.undirected),
            "oriented": format_rational(self.oriented),
            "ratio": format_rational(self.ratio),
            "orientation": orientation_to_dict(self.orientation),
            "evaluated": self.evaluated,
        }


def _ratio(numerator, denominator):
    if is_infinite(numerator):
        return INF
    if denominator == 0:
        return Fraction(1) if numerator == 0 else INF
    if is_infinite(denominator):
        return Fraction(0)
    return Fraction(numerator) / Fraction(denominator)


def mask_bits(mask: int, width: int) -> Tuple[int, ...]:
    # most significant bit first, so ascending masks are ascending bit tuples
    return tuple((mask >> (width - 1 - i)) & 1 for i in range(width))


def evaluate_orientation(network: NetworkOverTime, orientation: Orientation, objective: str,
                         T: Optional[int] = None):
    oriented = apply_orientation(network, orientation)
    if objective == "flow":
        return max_flow_value(oriented, T)
    return quickest_transshipment_time(oriented)


def _evaluate_mask_range(args) -> List:
    network, objective, T, edge_ids, base, start, stop = args
    width = len(edge_ids)
    values = []
    for mask in range(start, stop):
        orientation = orientation_from_bits(network, mask_bits(mask, width), edge_ids, base)
        values.append(evaluate_orientation(network, orientation, objective, T))
    return values


def enumerate_orientation_values(network: NetworkOverTime, objective: str = "flow",
                                 T: Optional[int] = None, jobs: int = 1,
                                 edge_ids: Optional[Sequence[int]] = None,
                                 base: Optional[Orientation] = None,
                                 cap: Optional[int] = None) -> List:
    """Objective value of every orientation, indexed by mask (bit 1 = reversed vs canonical)"""
    cap = ORACLE_CAPS["max_m"] if cap is None else cap
    edge_ids = [e.id for e in network.undirected_edges] if edge_ids is None else list(edge_ids)
    if len(edge_ids) > cap:
        raise CapExceededError(f"{len(edge_ids)} edges to enumerate exceed the cap of {cap}")
    total = 1 << len(edge_ids)
    chunk = max(1, total // (max(jobs, 1) * 8)) if jobs > 1 else total
    ranges = [(network, objective, T, edge_ids, base, start, min(start + chunk, total))
              for start in range(0, total, chunk)]
    values = []
    for part in parallel_map(_evaluate_mask_range, ranges, jobs):
        values.extend(part)
    return values


def brute_force_best_orientation(network: NetworkOverTime, objective: str = "flow",
                                 T: Optional[int] = None, jobs: int = 1,
                                 edge_ids: Optional[Sequence[int]] = None,
                                 base: Optional[Orientation] = None,
                                 cap: Optional[int] = None) -> PriceReport:
    """Exact optimum over all orientations; ties go to the lexicographically smallest bit tuple"""
    ensure_valid(network)
    objective = "time" if objective == "quickest" else objective
    if objective not in ("flow", "time"):
        raise ValidationError(f"unknown objective {objective!r}")
    if objective == "flow":
        T = network.horizon if T is None else T
        if T is None:
            raise PreconditionError("flow objective needs a horizon")
    edge_ids = [e.id for e in network.undirected_edges] if edge_ids is None else list(edge_ids)
    values = enumerate_orientation_values(network, objective, T, jobs, edge_ids, base, cap)

    best_mask = 0
    for mask, value in enumerate(values):
        better = value > values[best_mask] if objective == "flow" else value < values[best_mask]
        if better:
            best_mask = mask
    orientation = orientation_from_bits(network, mask_bits(best_mask, len(edge_ids)), edge_ids, base)

    if objective == "flow":
        undirected = max_flow_value(network, T)
        ratio = _ratio(undirected, values[best_mask])
    else:
        undirected = quickest_transshipment_time(network)
        ratio = _ratio(values[best_mask], undirected)
    logger.info(f"Brute force over {len(values)} orientations: undirected {undirected}, "
                f"best oriented {values[best_mask]}")
    return PriceReport(objective, undirected, values[best_mask], orientation, ratio,
                       T if objective == "flow" else None, len(values))


# ---------------------------------------------------------------------------
# Super terminals and the capacity fixed point
# ---------------------------------------------------------------------------

@dataclass
class SuperTerminalNetwork:
    """Original edges first, then one directed auxiliary arc per terminal"""
    original: NetworkOverTime
    network: NetworkOverTime
    super_source: str
    super_sink: str
    aux_edges: Dict[str, int]

    @property
    def terminals(self) -> List[str]:
        return list(self.aux_edges)

    def balance(self, terminal: str) -> Fraction:
        return self.original.balance(terminal)


def add_super_terminals(network: NetworkOverTime) -> SuperTerminalNetwork:
    """Attach super source/sink by infinite-capacity zero-transit auxiliary arcs"""
    taken = set(network.nodes)
    source = fresh_name("s*", taken)
    sink = fresh_name("t*", taken)
    edges = list(network.edges)
    aux = {}
    for v in network.sources:
        aux[v] = len(edges)
        edges.append(Edge(len(edges), source, v, INF, 0, False))
    for v in network.sinks:
        aux[v] = len(edges)
        edges.append(Edge(len(edges), v, sink, INF, 0, False))
    augmented = NetworkOverTime(network.nodes + (source, sink), tuple(edges), {}, network.horizon)
    return SuperTerminalNetwork(network, augmented, source, sink, aux)


def capacity_bound(network: NetworkOverTime) -> Fraction:
    """U: total capacity leaving the sources; an infinite sum falls back to B plus all finite capacities"""
    total = Fraction(0)
    for v in network.sources:
        for e in network.edges:
            if e.tail == v or (e.undirected and e.head == v):
                if is_infinite(e.capacity):
                    finite = sum((x.capacity for x in network.edges if not is_infinite(x.capacity)),
                                 Fraction(0))
                    return network.total_supply + finite
                total += e.capacity
    return total


@dataclass
class AuxiliaryCapacityVector:
    values: Dict[str, Fraction]
    U: Fraction

    def is_unbounded(self, terminal: str) -> bool:
        return self.values[terminal] == self.U

    def to_dict(self) -> dict:
        return {"U": format_rational(self.U),
                "values": {v: format_rational(u) for v, u in self.values.items()}}


@dataclass
class CapacityEvaluation:
    """Deterministic temporally repeated max flow for one auxiliary capacity vector"""
    static_network: NetworkOverTime
    layout: Dict[int, GadgetArcs]
    static_flow: StaticFlow
    repeated: TemporallyRepeatedFlow
    amounts: Dict[str, Fraction]


def evaluate_capacities(st: SuperTerminalNetwork, capacities: Mapping[str, Fraction], T: int) -> CapacityEvaluation:
    net = st.network.with_capacities({st.aux_edges[v]: capacities[v] for v in st.terminals})
    static_network = gadget_transform(net)
    layout = gadget_layout(net)
    x = max_temporally_repeated_static_flow(static_network, st.super_source, st.super_sink, T)
    x = cancel_opposing_gadget_flow(x, layout)
    repeated = temporally_repeated_from_static(x, static_network, T, st.super_source, st.super_sink)
    amounts = {v: repeated.amounts_through(layout[st.aux_edges[v]].middle) for v in st.terminals}
    return CapacityEvaluation(static_network, layout, x, repeated, amounts)


@dataclass
class FixedPointResult:
    capacities: AuxiliaryCapacityVector
    evaluation: CapacityEvaluation
    status: str  # "converged" or "max-iter"
    iterations: int
    residual: Fraction
    violations: List[str] = field(default_factory=list)
    within_tol: bool = False

    @property
    def converged(self) -> bool:
        return self.status == "converged"

    @property
    def balanced(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "iterations": self.iterations,
            "residual": format_rational(self.residual),
            "within_tol": self.within_tol,
            "balanced": self.balanced,
            "capacities": self.capacities.to_dict(),
            "amounts": {v: format_rational(a) for v, a in self.evaluation.amounts.items()},
            "violations": list(self.violations),
        }


def _balance_violations(st: SuperTerminalNetwork, capacities: AuxiliaryCapacityVector,
                      amounts: Mapping[str, Fraction], tol: Fraction) -> List[str]:
    """The two balance conditions a fixed point guarantees, relaxed by tol"""
    problems = []
    for v in st.terminals:
        b = abs(st.balance(v))
        if amounts[v] > b + tol:
            problems.append(f"{v}: amount {amounts[v]} exceeds |b| = {b}")
        if amounts[v] < b - tol and not capacities.is_unbounded(v):
            problems.append(f"{v}: amount {amounts[v]} below |b| = {b} with finite capacity")
    return problems


def _capacity_map(st: SuperTerminalNetwork, amounts: Mapping[str, Fraction],
                  u: Mapping[str, Fraction], U: Fraction) -> Tuple[Dict[str, Fraction], Fraction]:
    h = {v: U if amounts[v] == 0 else min(U, abs(st.balance(v)) / amounts[v] * u[v]) for v in st.terminals}
    return h, max((abs(u[v] - h[v]) for v in st.terminals), default=Fraction(0))


def fixed_point_capacity_iteration(st: SuperTerminalNetwork, T: Optional[int] = None,
                                   max_iter: Optional[int] = None, tol=None,
                                   damping=None) -> FixedPointResult:
    """Iterate u <- u + damping * (h(u) - u) from u = U

    h(u)_v = min(U, |b_v| / |f_v(u)| * u_v), and U where |f_v(u)| = 0.

    Stricter than a residual-only stop: the status is "converged" only once
    max |u - h(u)| <= tol AND both balance conditions hold within tol. The two checks
    are also reported on their own as within_tol and balanced.
    """
    T = st.original.horizon if T is None else T
    if T is None:
        raise PreconditionError("fixed point needs a horizon")
    max_iter = ORIENTATION_SETTINGS["max_iter"] if max_iter is None else max_iter
    tol = Fraction(str(ORIENTATION_SETTINGS["tolerance"] if tol is None else tol))
    damping = Fraction(str(ORIENTATION_SETTINGS["damping"] if damping is None else damping))
    if max_iter < 1 or tol <= 0 or not (0 < damping <= 1):
        raise PreconditionError("need max_iter >= 1, tol > 0 and damping in (0, 1]")

    U = capacity_bound(st.original)
    u = {v: U for v in st.terminals}
    for iteration in range(1, max_iter + 1):
        evaluation = evaluate_capacities(st, u, T)
        h, residual = _capacity_map(st, evaluation.amounts, u, U)
        current = AuxiliaryCapacityVector(dict(u), U)
        violations = _balance_violations(st, current, evaluation.amounts, tol)
        logger.debug(f"Fixed point iteration {iteration}: residual {float(residual):.3g}")
        if residual <= tol and not violations:
            logger.info(f"Capacity fixed point converged after {iteration} iterations")
            return FixedPointResult(current, evaluation, "converged", iteration, residual, within_tol=True)
        u = {v: u[v] + damping * (h[v] - u[v]) for v in st.terminals}

    evaluation = evaluate_capacities(st, u, T)
    current = AuxiliaryCapacityVector(dict(u), U)
    violations = _balance_violations(st, current, evaluation.amounts, tol)
    _, residual = _capacity_map(st, evaluation.amounts, u, U)
    logger.warning(f"Capacity fixed point not reached in {max_iter} iterations (residual {float(residual):.3g})")
    return FixedPointResult(current, evaluation, "max-iter", max_iter, residual, violations,
                            within_tol=residual <= tol)


@dataclass
class TerminalPartition:
    sources_finite: List[str]
    sources_unbounded: List[str]
    sinks_finite: List[str]
    sinks_unbounded: List[str]
    bound: Fraction
    parts: Dict[str, Fraction]
    meets_third: Optional[bool] = None

    def to_dict(self) -> dict:
        return {
            "sources_finite": self.sources_finite,
            "sources_unbounded": self.sources_unbounded,
            "sinks_finite": self.sinks_finite,
            "sinks_unbounded": self.sinks_unbounded,
            "bound": format_rational(self.bound),
            "parts": {k: format_rational(v) for k, v in self.parts.items()},
            "meets_third": self.meets_third,
        }


def partition_report(result: FixedPointResult, st: SuperTerminalNetwork,
                     T: Optional[int] = None) -> TerminalPartition:
    """Split terminals by finite / unbounded auxiliary capacity and certify a lower bound"""
    if not result.converged:
        raise PreconditionError(f"partition needs a converged fixed point, status is {result.status}")
    T = st.original.horizon if T is None else T
    network = st.original
    caps = result.capacities
    sources_finite = [v for v in network.sources if not caps.is_unbounded(v)]
    sources_unbounded = [v for v in network.sources if caps.is_unbounded(v)]
    sinks_finite = [v for v in network.sinks if not caps.is_unbounded(v)]
    sinks_unbounded = [v for v in network.sinks if caps.is_unbounded(v)]

    supply_finite = sum((network.balance(v) for v in sources_finite), Fraction(0))
    demand_finite = -sum((network.balance(v) for v in sinks_finite), Fraction(0))
    restricted = network.with_balances({v: network.balance(v) for v in sources_unbounded + sinks_unbounded})
    residual_value = max_flow_value(restricted, T)
    bound = max(supply_finite, demand_finite, residual_value)

    meets_third = None
    B = network.total_supply
    if max_flow_value(network, T) == B:
        meets_third = bound >= B / 3
        if not meets_third:
            logger.error(f"Certified bound {bound} is below B/3 = {B / 3}")
    return TerminalPartition(sources_finite, sources_unbounded, sinks_finite, sinks_unbounded, bound,
                             {"finite_supply": supply_finite, "finite_demand": demand_finite,
                              "unbounded_terminals_value": residual_value}, meets_third)


# ---------------------------------------------------------------------------
# Orientations from flows
# ---------------------------------------------------------------------------

def _static_from_repeated(repeated: TemporallyRepeatedFlow) -> StaticFlow:
    flow: Dict[int, Fraction] = {e.id: Fraction(0) for e in repeated.network.edges}
    for path, rate in repeated.decomposition.paths:
        for edge_id in path:
            flow[edge_id] += rate
    return flow


def orientation_from_flow(x: Union[StaticFlow, TemporallyRepeatedFlow], network: NetworkOverTime,
                          layout: Optional[Mapping[int, GadgetArcs]] = None) -> Orientation:
    """Direction of use for every undirected edge of network; flowless edges go canonical

    x lives on the gadget network of network (or of any network that starts with the
    same edges, such as its super-terminal extension, when layout is given).
    """
    if isinstance(x, TemporallyRepeatedFlow):
        x = _static_from_repeated(x)
    layout = gadget_layout(network) if layout is None else layout
    orientation = {}
    for e in network.undirected_edges:
        arcs = layout[e.id]
        forward = x.get(arcs.enter_tail, 0) > 0 or x.get(arcs.leave_head, 0) > 0
        backward = x.get(arcs.enter_head, 0) > 0 or x.get(arcs.leave_tail, 0) > 0
        if forward and backward:
            raise BidirectionalFlowError(f"edge {e.id} {{{e.tail},{e.head}}} carries flow both ways")
        if forward:
            orientation[e.id] = (e.tail, e.head)
        elif backward:
            orientation[e.id] = (e.head, e.tail)
        else:
            orientation[e.id] = canonical_direction(network, e)
    return orientation


def _require_full_supply(network: NetworkOverTime, T: int) -> Fraction:
    B = network.total_supply
    value = max_flow_value(network, T)
    if value != B:
        raise PreconditionError(f"the undirected network sends {value} < B = {B} within T = {T}")
    return B


@dataclass
class OneThirdResult:
    orientation: Orientation
    flow: FlowOverTime
    certified_value: Fraction
    fixed_point: FixedPointResult
    partition: TerminalPartition
    meets_bound: bool


def orient_one_third(network: NetworkOverTime, T: Optional[int] = None, max_iter: Optional[int] = None,
                     tol=None, damping=None,
                     fixed_point: Optional[FixedPointResult] = None) -> OneThirdResult:
    """Super terminals, capacity fixed point, orientation from the resulting flow

    A fixed point already computed on add_super_terminals(network) can be passed in.
    """
    ensure_valid(network)
    T = network.horizon if T is None else T
    if T is None:
        raise PreconditionError("orientation needs a horizon")
    B = _require_full_supply(network, T)
    st = add_super_terminals(network)
    result = fixed_point or fixed_point_capacity_iteration(st, T, max_iter, tol, damping)
    if not result.converged:
        raise ConvergenceError(f"capacity fixed point status {result.status} after {result.iterations} "
                               f"iterations (residual {float(result.residual):.3g})")
    partition = partition_report(result, st, T)
    orientation = orientation_from_flow(result.evaluation.static_flow, network, result.evaluation.layout)
    oriented = apply_orientation(network, orientation)
    value, witness = max_flow_over_time(oriented, T)
    meets_bound = value >= B / 3
    if not meets_bound:
        logger.error(f"Oriented value {value} is below B/3 = {B / 3}")
    logger.info(f"One-third orientation certified value {value} (B = {B})")
    return OneThirdResult(orientation, witness, value, result, partition, meets_bound)


@dataclass
class BicriteriaResult:
    orientation: Orientation
    flow: FlowOverTime
    value: Fraction
    horizon: int


def bicriteria_orient(network: NetworkOverTime, T: Optional[int] = None) -> BicriteriaResult:
    """At least B/2 within 2T from the halved temporally repeated flow of the rate-capped network"""
    ensure_valid(network)
    T = network.horizon if T is None else T
    if T is None or T < 1:
        raise PreconditionError("bicriteria orientation needs a positive horizon")
    B = _require_full_supply(network, T)
    st = add_super_terminals(network)
    capacities = {v: abs(network.balance(v)) / T for v in st.terminals}
    evaluation = evaluate_capacities(st, capacities, 2 * T)
    orientation = orientation_from_flow(evaluation.static_flow, network, evaluation.layout)
    oriented = apply_orientation(network, orientation).with_horizon(2 * T)

    middle_of = {arcs.middle: edge_id for edge_id, arcs in evaluation.layout.items() if edge_id < network.m}
    halved = PathDecomposition()
    for path, rate in evaluation.repeated.decomposition.paths:
        cut = tuple(middle_of[arc] for arc in path if arc in middle_of)
        halved.paths.append((cut, rate / 2))
    flow = TemporallyRepeatedFlow(oriented, halved, 2 * T).to_flow_over_time()

    problems = check_feasibility(flow, oriented)
    value = flow.value
    if problems:
        raise InfeasibleError("bicriteria flow failed its own check: " + "; ".join(problems[:5]))
    if value < B / 2:
        raise InfeasibleError(f"bicriteria value {value} is below B/2 = {B / 2}")
    logger.info(f"Bicriteria orientation sends {value} within {2 * T} (B = {B})")
    return BicriteriaResult(orientation, flow, value, 2 * T)


# ---------------------------------------------------------------------------
# Earliest arrival approximation
# ---------------------------------------------------------------------------

def _curve_at(f: Curve, theta: int) -> Fraction:
    if isinstance(f, FlowOverTime):
        return flow_value_at(f, theta)
    return f[theta]


def _curve_horizon(f: Curve) -> int:
    return f.horizon if isinstance(f, FlowOverTime) else max(f)


def _check_pattern(p: Mapping[int, Fraction], T: int):
    missing = [theta for theta in range(T + 1) if theta not in p]
    if missing:
        raise ValidationError(f"pattern does not cover [0, {T}] (missing {missing[:3]}...)")


def check_alpha_time_approx(f: Curve, p: Mapping[int, Fraction], alpha) -> bool:
    """|f|_theta >= p(floor(theta / alpha)) at every integer theta in [0, T]"""
    alpha = Fraction(alpha)
    if alpha < 1:
        raise PreconditionError(f"alpha must be at least 1, got {alpha}")
    T = _curve_horizon(f)
    _check_pattern(p, T)
    return all(_curve_at(f, theta) >= p[math.floor(Fraction(theta) / alpha)] for theta in range(T + 1))


def check_beta_value_approx(f: Curve, p: Mapping[int, Fraction], beta) -> bool:
    """|f|_theta >= p(theta) / beta at every integer theta in [0, T]"""
    beta = Fraction(beta)
    if beta < 1:
        raise PreconditionError(f"beta must be at least 1, got {beta}")
    T = _curve_horizon(f)
    _check_pattern(p, T)
    return all(_curve_at(f, theta) >= p[theta] / beta for theta in range(T + 1))


def minimal_alpha(curve: Mapping[int, Fraction], p: Mapping[int, Fraction]) -> Tuple[Fraction, bool]:
    """Infimum of grid-feasible alpha and whether it is attained"""
    T = max(curve)
    worst = Fraction(0)
    for theta in range(T + 1):
        k = max((k for k in range(T + 1) if p[k] <= curve[theta]), default=0)
        if k >= T:
            continue
        worst = max(worst, Fraction(theta, k + 1))
    if worst < 1:
        return Fraction(1), True
    return worst, False


def minimal_beta(curve: Mapping[int, Fraction], p: Mapping[int, Fraction]):
    worst = Fraction(1)
    for theta in range(max(curve) + 1):
        if p[theta] == 0:
            continue
        if curve[theta] == 0:
            return INF
        worst = max(worst, p[theta] / curve[theta])
    return worst


@dataclass
class EafRow:
    orientation: Orientation
    pattern: Dict[int, Fraction]
    alpha: Fraction
    alpha_attained: bool
    beta: object

    def to_dict(self) -> dict:
        return {
            "orientation": orientation_to_dict(self.orientation),
            "alpha": format_rational(self.alpha),
            "alpha_attained": self.alpha_attained,
            "beta": format_rational(self.beta),
            "pattern": [format_rational(self.pattern[t]) for t in sorted(self.pattern)],
        }


@dataclass
class EafReport:
    pattern: Dict[int, Fraction]
    rows: List[EafRow]
    reference_T: int

    @property
    def best_alpha(self) -> Fraction:
        return min(row.alpha for row in self.rows)

    @property
    def best_beta(self):
        return min(row.beta for row in self.rows)

    def alpha_possible_below(self, threshold) -> bool:
        """Some orientation meets the alpha check for an alpha strictly below threshold"""
        return any(row.alpha < threshold for row in self.rows)

    def to_dict(self) -> dict:
        T = self.reference_T
        return {
            "reference_T": T,
            "pattern": [format_rational(self.pattern[t]) for t in sorted(self.pattern)],
            "best_alpha": format_rational(self.best_alpha),
            "best_beta": format_rational(self.best_beta),
            "alpha_below_half_T_possible": self.alpha_possible_below(Fraction(T, 2)),
            "alpha_below_T_possible": self.alpha_possible_below(Fraction(T)),
            "rows": [row.to_dict() for row in self.rows],
        }


def eaf_contraflow_experiment(network: NetworkOverTime, T_max: int, jobs: int = 1,
                              reference_T: Optional[int] = None,
                              cap: Optional[int] = None) -> EafReport:
    """Minimal grid alpha and beta of every orientation against the undirected pattern

    Each orientation is judged by its own arrival pattern, the upper envelope of
    every flow it admits, so the reported values are lower bounds for any flow.
    """
    ensure_valid(network)
    cap = ORACLE_CAPS["max_m"] if cap is None else cap
    edge_ids = [e.id for e in network.undirected_edges]
    if len(edge_ids) > cap:
        raise CapExceededError(f"{len(edge_ids)} edges to enumerate exceed the cap of {cap}")
    p = earliest_arrival_pattern(network, T_max, jobs)
    rows = []
    for mask in range(1 << len(edge_ids)):
        orientation = orientation_from_bits(network, mask_bits(mask, len(edge_ids)), edge_ids)
        curve = earliest_arrival_pattern(apply_orientation(network, orientation), T_max, jobs)
        alpha, attained = minimal_alpha(curve, p)
        rows.append(EafRow(orientation, curve, alpha, attained, minimal_beta(curve, p)))
    if reference_T is None:
        reference_T = network.metadata.get("params", {}).get("T")
    if not isinstance(reference_T, int):
        reference_T = network.horizon if network.horizon is not None else T_max
    return EafReport(p, rows, reference_T)
