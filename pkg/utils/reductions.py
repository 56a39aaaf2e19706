"""
Hardness Reductions
3-SAT and PARTITION compiled into contraflow instances, with gap verification
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple
import sys

sys.path.append(str(Path(__file__).parent.parent))
from utils.exceptions import PreconditionError, ValidationError
from utils.helpers import INF, format_rational, is_infinite, parallel_map
from utils.network_model import (
    NetworkBuilder, NetworkOverTime, Orientation, apply_orientation, ensure_valid,
    orientation_from_bits, orientation_from_dict, orientation_to_dict
)
from utils.mc_feasibility import max_concurrent_value, mc_quickest_time
from utils.orientation import PriceReport, mask_bits, brute_force_best_orientation
from utils.temporal_flow import quickest_bracket

logger = logging.getLogger(__name__)

Literal = Tuple[int, bool]  # (variable index, negated)


@dataclass(frozen=True)
class CnfFormula:
    num_vars: int
    clauses: Tuple[Tuple[Literal, ...], ...]

    def __post_init__(self):
        if self.num_vars < 1:
            raise ValidationError("formula needs at least one variable")
        if not self.clauses:
            raise ValidationError("formula needs at least one clause")
        for position, clause in enumerate(self.clauses):
            if len(clause) != 3:
                raise ValidationError(f"clause {position + 1} has {len(clause)} literals, expected 3")
            for var, _ in clause:
                if not 1 <= var <= self.num_vars:
                    raise ValidationError(f"clause {position + 1} uses variable {var} outside 1..{self.num_vars}")

    @classmethod
    def from_ints(cls, num_vars: int, clauses: Sequence[Sequence[int]]) -> "CnfFormula":
        return cls(num_vars, tuple(tuple((abs(x), x < 0) for x in clause) for clause in clauses))

    @property
    def k(self) -> int:
        return self.num_vars

    @property
    def l(self) -> int:
        return len(self.clauses)

    def evaluate(self, assignment: Dict[int, bool]) -> bool:
        return all(any(assignment[var] != negated for var, negated in clause) for clause in self.clauses)

    def to_dimacs(self) -> str:
        lines = [f"p cnf {self.num_vars} {len(self.clauses)}"]
        for clause in self.clauses:
            lines.append(" ".join(str(-var if negated else var) for var, negated in clause) + " 0")
        return "\n".join(lines) + "\n"


def parse_dimacs(text: str) -> CnfFormula:
    """The p-cnf subset with three literals per clause; comment lines start with c"""
    num_vars = None
    declared = None
    clauses: List[List[int]] = []
    current: List[int] = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("c") or line.startswith("%"):
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise ValidationError(f"bad problem line {line!r}")
            num_vars, declared = int(parts[2]), int(parts[3])
            continue
        try:
            numbers = [int(token) for token in line.split()]
        except ValueError as e:
            raise ValidationError(f"bad clause line {line!r}") from e
        for number in numbers:
            if number == 0:
                clauses.append(current)
                current = []
            else:
                current.append(number)
    if current:
        clauses.append(current)
    if num_vars is None:
        raise ValidationError("missing 'p cnf' header")
    if declared is not None and declared != len(clauses):
        logger.warning(f"Header declares {declared} clauses, found {len(clauses)}")
    return CnfFormula.from_ints(num_vars, clauses)


def load_cnf(path) -> CnfFormula:
    with open(path, encoding="utf-8") as handle:
        return parse_dimacs(handle.read())


@dataclass(frozen=True)
class PartitionInstance:
    values: Tuple[int, ...]

    def __post_init__(self):
        if not self.values or any(a < 1 for a in self.values):
            raise ValidationError("partition values must be positive integers")
        if sum(self.values) % 2:
            raise ValidationError(f"partition sum {sum(self.values)} is odd")

    @property
    def L(self) -> int:
        return sum(self.values) // 2

    def is_yes(self) -> bool:
        reachable = {0}
        for a in self.values:
            reachable |= {s + a for s in reachable if s + a <= self.L}
        return self.L in reachable


def parse_partition(text: str) -> PartitionInstance:
    try:
        return PartitionInstance(tuple(int(token) for token in text.split()))
    except ValueError as e:
        raise ValidationError(f"partition input must be whitespace-separated integers ({str(e)})") from e


def load_partition(path) -> PartitionInstance:
    with open(path, encoding="utf-8") as handle:
        return parse_partition(handle.read())


# ---------------------------------------------------------------------------
# DPLL labeler
# ---------------------------------------------------------------------------

def _simplify(clauses: List[frozenset], literal: int) -> Optional[List[frozenset]]:
    result = []
    for clause in clauses:
        if literal in clause:
            continue
        reduced = clause - {-literal}
        if not reduced:
            return None
        result.append(reduced)
    return result


def _dpll(clauses: List[frozenset], assignment: Dict[int, bool]) -> Optional[Dict[int, bool]]:
    while True:
        unit = next((next(iter(c)) for c in clauses if len(c) == 1), None)
        if unit is None:
            break
        assignment = {**assignment, abs(unit): unit > 0}
        clauses = _simplify(clauses, unit)
        if clauses is None:
            return None
    if not clauses:
        return assignment
    literal = next(iter(min(clauses, key=len)))
    for choice in (literal, -literal):
        reduced = _simplify(clauses, choice)
        if reduced is not None:
            found = _dpll(reduced, {**assignment, abs(choice): choice > 0})
            if found is not None:
                return found
    return None


def satisfying_assignment(formula: CnfFormula) -> Optional[Dict[int, bool]]:
    """Unit propagation plus branching; free variables default to False"""
    clauses = [frozenset(-var if negated else var for var, negated in clause) for clause in formula.clauses]
    found = _dpll(clauses, {})
    if found is None:
        return None
    return {var: found.get(var, False) for var in range(1, formula.num_vars + 1)}


def is_satisfiable(formula: CnfFormula) -> bool:
    return satisfying_assignment(formula) is not None


# ---------------------------------------------------------------------------
# Reductions
# ---------------------------------------------------------------------------

def _literal_node(var: int, negated: bool, copy) -> str:
    return f"{'~' if negated else ''}x{var}^{copy}"


def _finish(g: NetworkBuilder, horizon, family: str, fixed: Orientation, literal_edges: List[int],
            params: dict, **extra) -> NetworkOverTime:
    network = g.build(horizon, family=family, params=params,
                      fixed_orientation=orientation_to_dict(fixed), literal_edges=literal_edges, **extra)
    ensure_valid(network)
    logger.debug(f"Compiled {family}: {network.n} nodes, {network.m} edges")
    return network


def reduce_3sat_quickest(formula: CnfFormula, tau1: int, tau2: int) -> NetworkOverTime:
    """Variable blocks with literal pairs; clauses route through the literal they make true"""
    if tau1 < 1 or tau2 < 0:
        raise PreconditionError(f"need tau1 > 0 and tau2 >= 0, got {tau1}, {tau2}")
    g = NetworkBuilder()
    fixed: Orientation = {}
    literal_edges, source_edges = [], []

    def edge(tail, head, transit):
        edge_id = g.add_edge(tail, head, INF, transit)
        fixed[edge_id] = (tail, head)
        return edge_id

    for var in range(1, formula.num_vars + 1):
        source, sink = f"s{var}", f"t{var}"
        g.add_node(source, 1)
        g.add_node(sink, -1)
        for negated in (False, True):
            top, bottom = _literal_node(var, negated, 1), _literal_node(var, negated, 2)
            literal_edges.append(edge(top, bottom, tau2))
            source_edges.append(edge(source, bottom, tau2))
            edge(top, sink, tau1)
    for j, clause in enumerate(formula.clauses, start=1):
        plus, minus = f"c{j}+", f"c{j}-"
        g.add_node(plus, 1)
        g.add_node(minus, -1)
        for var, negated in clause:
            edge(plus, _literal_node(var, negated, 1), tau1)
        for var, negated in clause:
            edge(_literal_node(var, negated, 2), minus, tau2)
    for edge_id in literal_edges:
        fixed.pop(edge_id)
    return _finish(g, None, "sat-quickest", fixed, literal_edges,
                   {"tau1": tau1, "tau2": tau2, "k": formula.k, "l": formula.l},
                   source_edges=source_edges)


def reduce_partition_maxfot(instance: PartitionInstance) -> NetworkOverTime:
    """Chain of parallel edge pairs; the two crossing flows split the transits between them"""
    L = instance.L
    n = len(instance.values)
    g = NetworkBuilder()
    g.add_node("s1", 1)
    g.add_node("s2", 1)
    g.add_node("t1", -1)
    g.add_node("t2", -1)
    g.add_edge("s1", "v1", 1, L + 1)
    g.add_edge("t2", "v1", 1, L + 1)
    for i, a in enumerate(instance.values, start=1):
        g.add_edge(f"v{i}", f"v{i + 1}", 1, a)
        g.add_edge(f"v{i}", f"v{i + 1}", 1, 0)
    g.add_edge("s2", f"v{n + 1}", 1, 0)
    g.add_edge("t1", f"v{n + 1}", 1, 0)
    network = g.build(2 * L + 2, family="partition-max",
                      params={"values": list(instance.values), "L": L})
    ensure_valid(network)
    return network


def _concurrent_literal_nodes(var: int, negated: bool) -> Tuple[str, str, str]:
    return _literal_node(var, negated, 1), _literal_node(var, negated, 2), f"{'~' if negated else ''}x{var}-"


def reduce_3sat_concurrent(formula: CnfFormula) -> NetworkOverTime:
    """Nine-node variable blocks; capacity l everywhere, zero transits, one commodity per variable and clause"""
    for j, clause in enumerate(formula.clauses, start=1):
        if len({var for var, _ in clause}) < 3:
            raise PreconditionError(f"clause {j} repeats a variable")
    cap = formula.l
    g = NetworkBuilder()
    fixed: Orientation = {}
    literal_edges = []

    def edge(tail, head):
        edge_id = g.add_edge(tail, head, cap, 0)
        fixed[edge_id] = (tail, head)
        return edge_id

    for j in range(1, formula.l + 1):
        g.add_node(f"c{j}")
    for var in range(1, formula.num_vars + 1):
        plus, minus, minus_bar = f"d{var}+", f"d{var}-", f"~d{var}-"
        for negated in (False, True):
            g.add_nodes(*_concurrent_literal_nodes(var, negated))
        g.add_nodes(minus, minus_bar, plus)
        x1, x2, x_sink = _concurrent_literal_nodes(var, False)
        y1, y2, y_sink = _concurrent_literal_nodes(var, True)
        edge(plus, x2)
        edge(plus, y2)
        edge(x1, minus)
        edge(y1, minus_bar)
        edge(x2, x_sink)
        edge(y2, y_sink)
        literal_edges.append(edge(x1, x2))
        literal_edges.append(edge(y1, y2))
        g.add_commodity({plus: 2, minus: -1, minus_bar: -1})
    for j, clause in enumerate(formula.clauses, start=1):
        demands = {f"c{j}": 3}
        for var, negated in clause:
            top, _, sink = _concurrent_literal_nodes(var, negated)
            edge(f"c{j}", top)
            demands[sink] = -1
        g.add_commodity(demands)
    for edge_id in literal_edges:
        fixed.pop(edge_id)
    return _finish(g, None, "sat-concurrent", fixed, literal_edges, {"k": formula.k, "l": formula.l})


def reduce_3sat_mc_quickest(formula: CnfFormula, C: int) -> NetworkOverTime:
    """Super sink c-; variable commodities need C^2 + C units split evenly over d- and ~d-"""
    if C < formula.l or C < 1:
        raise PreconditionError(f"need C >= l = {formula.l}, got {C}")
    if C % 2:
        raise PreconditionError(f"C must be even so that (C^2 + C) / 2 is integral, got {C}")
    big, half = C * C, (C * C + C) // 2
    g = NetworkBuilder()
    fixed: Orientation = {}
    literal_edges = []

    def edge(tail, head, capacity):
        edge_id = g.add_edge(tail, head, capacity, 0)
        fixed[edge_id] = (tail, head)
        return edge_id

    g.add_node("c-")
    for j in range(1, formula.l + 1):
        g.add_node(f"c{j}")
    for var in range(1, formula.num_vars + 1):
        x1, x2 = _literal_node(var, False, 1), _literal_node(var, False, 2)
        y1, y2 = _literal_node(var, True, 1), _literal_node(var, True, 2)
        minus, minus_bar, plus, hat = f"d{var}-", f"~d{var}-", f"d{var}+", f"^d{var}+"
        g.add_nodes(x1, x2, y1, y2, minus, minus_bar, plus, hat)
        edge(plus, x2, C)
        edge(plus, y2, C)
        edge(x1, minus, C)
        edge(y1, minus_bar, C)
        edge(x2, "c-", formula.l)
        edge(y2, "c-", formula.l)
        literal_edges.append(edge(x1, x2, C))
        literal_edges.append(edge(y1, y2, C))
        edge(hat, minus, big)
        edge(hat, minus_bar, big)
        g.add_commodity({plus: C, hat: big, minus: -half, minus_bar: -half})
    for j, clause in enumerate(formula.clauses, start=1):
        for var, negated in clause:
            edge(f"c{j}", _literal_node(var, negated, 1), 1)
        g.add_commodity({f"c{j}": 1, "c-": -1})
    for edge_id in literal_edges:
        fixed.pop(edge_id)
    return _finish(g, None, "sat-mc-quickest", fixed, literal_edges, {"C": C, "k": formula.k, "l": formula.l})


# ---------------------------------------------------------------------------
# Restricted orientation oracles
# ---------------------------------------------------------------------------

def restricted_edges(network: NetworkOverTime, widen: bool = False) -> Tuple[List[int], Orientation]:
    """Literal edges to enumerate and the fixed orientation of every other edge"""
    if "literal_edges" not in network.metadata:
        raise PreconditionError("instance carries no literal edge metadata")
    edge_ids = list(network.metadata["literal_edges"])
    base = orientation_from_dict(network.metadata.get("fixed_orientation", {}))
    if widen:
        edge_ids += list(network.metadata.get("source_edges", []))
    return sorted(edge_ids), base


def restricted_quickest_oracle(network: NetworkOverTime, jobs: int = 1, widen: bool = False) -> PriceReport:
    edge_ids, base = restricted_edges(network, widen)
    logger.info(f"Restricted oracle enumerates {len(edge_ids)} edges")
    return brute_force_best_orientation(network, "time", jobs=jobs, edge_ids=edge_ids, base=base)


def assignment_orientation(network: NetworkOverTime, assignment: Dict[int, bool]) -> Orientation:
    """True x_i orients {x^1, x^2} downward and {~x^1, ~x^2} upward; false does the reverse"""
    _, base = restricted_edges(network)
    orientation = dict(base)
    for edge_id in network.metadata["literal_edges"]:
        e = network.edges[edge_id]
        var = int(e.tail.lstrip("~").split("^")[0][1:])
        negated = e.tail.startswith("~")
        down = assignment[var] != negated
        orientation[edge_id] = (e.tail, e.head) if down else (e.head, e.tail)
    return orientation


def _restricted_orientations(network: NetworkOverTime) -> List[Orientation]:
    edge_ids, base = restricted_edges(network)
    return [orientation_from_bits(network, mask_bits(mask, len(edge_ids)), edge_ids, base)
            for mask in range(1 << len(edge_ids))]


def _concurrent_value(args) -> Fraction:
    network, orientation = args
    return max_concurrent_value(apply_orientation(network, orientation))


def _mc_quickest(args):
    network, orientation, cap = args
    return mc_quickest_time(apply_orientation(network, orientation), cap)


# ---------------------------------------------------------------------------
# Gap verification
# ---------------------------------------------------------------------------

@dataclass
class GapReport:
    kind: str
    label: str  # "YES" or "NO" for the source problem
    expected: str
    measured: object
    holds: bool
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "label": self.label,
            "expected": self.expected,
            "measured": format_rational(self.measured),
            "holds": self.holds,
            "details": self.details,
        }


def verify_sat_quickest(formula: CnfFormula, tau1: int = 2, tau2: int = 0, jobs: int = 1,
                        widen: bool = False) -> GapReport:
    """Infimum horizon over restricted orientations against tau1 + 2 tau2 (YES) or 2 tau1 (NO)"""
    network = reduce_3sat_quickest(formula, tau1, tau2)
    report = restricted_quickest_oracle(network, jobs, widen)
    yes = is_satisfiable(formula)
    if is_infinite(report.oriented):
        infimum = INF
    else:
        infimum = quickest_bracket(apply_orientation(network, report.orientation)).lower
    if yes:
        expected, holds = f"infimum = {tau1 + 2 * tau2}", infimum == tau1 + 2 * tau2
    else:
        expected, holds = f"infimum >= {2 * tau1}", infimum >= 2 * tau1
    details = {"integer_horizon": format_rational(report.oriented), "infimum": format_rational(infimum),
               "evaluated": report.evaluated, "widened": widen,
               "orientation": orientation_to_dict(report.orientation)}
    return GapReport("sat-quickest", "YES" if yes else "NO", expected, infimum, holds, details)


def verify_partition_maxfot(instance: PartitionInstance, jobs: int = 1) -> GapReport:
    network = reduce_partition_maxfot(instance)
    report = brute_force_best_orientation(network, "flow", jobs=jobs)
    yes = instance.is_yes()
    expected = 2 if yes else 1
    details = {"undirected": format_rational(report.undirected), "evaluated": report.evaluated,
               "orientation": orientation_to_dict(report.orientation)}
    return GapReport("partition-max", "YES" if yes else "NO", f"value = {expected}",
                     report.oriented, report.oriented == expected, details)


def verify_sat_concurrent(formula: CnfFormula, jobs: int = 1) -> GapReport:
    network = reduce_3sat_concurrent(formula)
    orientations = _restricted_orientations(network)
    values = parallel_map(_concurrent_value, [(network, o) for o in orientations], jobs)
    best = max(values)
    assignment = satisfying_assignment(formula)
    details = {"evaluated": len(values), "best_orientation": orientation_to_dict(orientations[values.index(best)])}
    if assignment is not None:
        assigned = max_concurrent_value(apply_orientation(network, assignment_orientation(network, assignment)))
        details["assignment_value"] = format_rational(assigned)
        return GapReport("sat-concurrent", "YES", "lambda >= 1/3", best,
                         assigned >= Fraction(1, 3) and best >= Fraction(1, 3), details)
    return GapReport("sat-concurrent", "NO", "lambda = 0", best, best == 0, details)


def verify_sat_mc_quickest(formula: CnfFormula, C: int, jobs: int = 1) -> GapReport:
    network = reduce_3sat_mc_quickest(formula, C)
    assignment = satisfying_assignment(formula)
    bound = Fraction(C, 2 * formula.l)
    if assignment is not None:
        orientation = assignment_orientation(network, assignment)
        measured = mc_quickest_time(apply_orientation(network, orientation), C)
        details = {"orientation": orientation_to_dict(orientation)}
        return GapReport("sat-mc-quickest", "YES", "1 time unit", measured, measured == 1, details)
    orientations = _restricted_orientations(network)
    times = parallel_map(_mc_quickest, [(network, o, C) for o in orientations], jobs)
    measured = min(times)
    details = {"evaluated": len(times), "bound": format_rational(bound)}
    return GapReport("sat-mc-quickest", "NO", f">= C/(2l) = {format_rational(bound)}",
                     measured, measured >= bound, details)


REDUCTIONS = ("sat-quickest", "partition-max", "sat-concurrent", "sat-mc-quickest")
