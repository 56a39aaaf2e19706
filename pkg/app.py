"""
tempoflow
Command line for flows over time, orientations and contraflow experiments
"""

import argparse
import json
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Callable, Dict, List, Optional
import sys

sys.path.insert(0, str(Path(__file__).parent))

from config.settings import DATABASE_CONFIG, ORACLE_CAPS, ORIENTATION_SETTINGS, SOLVER_SETTINGS
from database.operations import ExperimentRunOperations, SystemLogOperations
from utils.exceptions import CapExceededError, InfeasibleError, PreconditionError, TempoflowError, ValidationError
from utils.export import ExportManager, dumps_canonical, pattern_rows
from utils.generators import FAMILIES, build_family
from utils.helpers import (
    format_datetime, format_rational, generate_run_id, is_infinite, parse_rational,
    resolve_jobs, set_verbose, setup_logging
)
from utils.network_model import (
    NetworkOverTime, apply_orientation, load_network, network_to_dict, orientation_from_dict,
    orientation_label, orientation_to_dict
)
from utils.orientation import (
    add_super_terminals, bicriteria_orient, brute_force_best_orientation, eaf_contraflow_experiment,
    evaluate_orientation, fixed_point_capacity_iteration, minimal_alpha, minimal_beta, orient_one_third
)
from utils.reductions import (
    REDUCTIONS, load_cnf, load_partition, reduce_3sat_concurrent, reduce_3sat_mc_quickest,
    reduce_3sat_quickest, reduce_partition_maxfot, verify_partition_maxfot, verify_sat_concurrent,
    verify_sat_mc_quickest, verify_sat_quickest
)
from utils.temporal_flow import (
    FlowOverTime, check_feasibility, earliest_arrival_pattern, flow_from_dict, flow_to_dict,
    max_flow_over_time, max_flow_value, quickest_bracket
)

logger = setup_logging("tempoflow")

GENERATE_CHOICES = list(FAMILIES) + list(REDUCTIONS)
SWEEP_KEYS = ("T", "delta", "eps", "k", "U", "seed", "n", "m", "sources", "sinks")


@dataclass
class CommandOutput:
    payload: object
    headline: Optional[str] = None
    rows: Optional[List[dict]] = None
    columns: Optional[List[str]] = None
    exit_code: int = 0
    patterns: Optional[Dict[str, Dict[int, Fraction]]] = None


# ---------------------------------------------------------------------------
# Shared checks
# ---------------------------------------------------------------------------

def _horizon(args, network: NetworkOverTime, required: bool = True) -> Optional[int]:
    T = args.T if getattr(args, "T", None) is not None else network.horizon
    if T is None:
        if required:
            raise PreconditionError("no --T given and the instance has no horizon")
        return None
    max_T = getattr(args, "max_T", None) or ORACLE_CAPS["max_T"]
    if T > max_T:
        raise CapExceededError(f"horizon {T} exceeds the cap of {max_T}")
    return T


def _revalidate(witness: FlowOverTime, value) -> dict:
    """Serialize the witness, read it back and check it again before anything is written"""
    data = flow_to_dict(witness, value)
    reread = flow_from_dict(json.loads(json.dumps(data)), witness.network)
    problems = check_feasibility(reread)
    if problems:
        raise InfeasibleError("witness failed re-validation: " + "; ".join(problems[:5]))
    if reread.value != value:
        raise InfeasibleError(f"witness sends {reread.value}, reported {value}")
    return data


def _require_file(path, option: str) -> Path:
    if not path:
        raise ValidationError(f"{option} is required for this command")
    return Path(path)


def _parse_sweep_entry(text: str) -> dict:
    params = {}
    for item in text.split(","):
        key, sep, value = item.partition("=")
        key = key.strip()
        if not sep or key not in SWEEP_KEYS:
            raise ValidationError(f"bad sweep entry {item!r}, expected key=value with key in {SWEEP_KEYS}")
        value = value.strip()
        params[key] = int(value) if value.lstrip("-").isdigit() else parse_rational(value)
    return params


def _load_orientation(path) -> dict:
    with open(path, encoding="utf-8") as handle:
        try:
            data = json.load(handle)
        except json.JSONDecodeError as e:
            raise ValidationError(f"{path}: not valid JSON ({str(e)})") from e
    return orientation_from_dict(data.get("orientation", data))


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_generate(args, jobs: int) -> CommandOutput:
    family = args.family
    if family == "sat-quickest":
        network = reduce_3sat_quickest(load_cnf(_require_file(args.cnf, "--cnf")), args.tau1, args.tau2)
    elif family == "partition-max":
        network = reduce_partition_maxfot(load_partition(_require_file(args.partition, "--partition")))
    elif family == "sat-concurrent":
        network = reduce_3sat_concurrent(load_cnf(_require_file(args.cnf, "--cnf")))
    elif family == "sat-mc-quickest":
        network = reduce_3sat_mc_quickest(load_cnf(_require_file(args.cnf, "--cnf")), args.C)
    else:
        network = build_family(family, **{key: getattr(args, key) for key in SWEEP_KEYS})
    logger.info(f"Generated {family}: {network.n} nodes, {network.m} edges, horizon {network.horizon}")
    rows = [{"id": e.id, "tail": e.tail, "head": e.head, "undirected": e.undirected,
             "capacity": e.capacity, "transit": e.transit} for e in network.edges]
    return CommandOutput(network_to_dict(network), f"{network.n} nodes, {network.m} edges", rows)


def cmd_solve(args, jobs: int) -> CommandOutput:
    network = load_network(args.instance)
    if args.mode == "maxfot":
        T = _horizon(args, network)
        value, witness = max_flow_over_time(network, T)
        payload = {"mode": "maxfot", "horizon": T, "value": value,
                   "witness_on_gadget": not network.is_directed, "witness": _revalidate(witness, value)}
        return CommandOutput(payload, format_rational(value), [{"horizon": T, "value": value}])

    if args.mode == "quickest":
        bracket = quickest_bracket(network, args.max_T or SOLVER_SETTINGS["max_horizon"])
        payload = {"mode": "quickest", "time": bracket.upper, "lower": bracket.lower,
                   "lower_is_infimum": bracket.lower_is_infimum}
        if not is_infinite(bracket.upper) and bracket.upper > 0:
            T = bracket.upper
            B = network.total_supply
            value, witness = max_flow_over_time(network, T)
            if value != B or max_flow_value(network, T - 1) == B:
                raise InfeasibleError(f"quickest horizon {T} did not re-check against B = {B}")
            payload["witness_on_gadget"] = not network.is_directed
            payload["witness"] = _revalidate(witness, value)
        return CommandOutput(payload, format_rational(bracket.upper),
                             [{"time": bracket.upper, "lower": bracket.lower,
                               "lower_is_infimum": bracket.lower_is_infimum}])

    T_max = _horizon(args, network)
    pattern = earliest_arrival_pattern(network, T_max, jobs)
    values = [pattern[t] for t in sorted(pattern)]
    if any(a > b for a, b in zip(values, values[1:])):
        raise InfeasibleError("earliest arrival pattern is not monotone")
    payload = {"mode": "pattern", "T_max": T_max, "pattern": values}
    return CommandOutput(payload, format_rational(values[-1]),
                         pattern_rows({"value": pattern}), ["theta", "value"])


def _orient_bruteforce(args, network: NetworkOverTime, jobs: int) -> CommandOutput:
    objective = args.objective
    T = _horizon(args, network, required=objective == "flow")
    report = brute_force_best_orientation(network, objective, T, jobs, cap=args.max_m)
    again = evaluate_orientation(network, report.orientation, report.kind, T)
    if again != report.oriented:
        raise InfeasibleError(f"re-solving the best orientation gave {again}, reported {report.oriented}")
    payload = {"algorithm": "bruteforce", **report.to_dict()}
    if report.kind == "flow":
        value, witness = max_flow_over_time(apply_orientation(network, report.orientation), T)
        payload["witness"] = _revalidate(witness, value)
    row = {"undirected": report.undirected, "oriented": report.oriented, "ratio": report.ratio,
           "evaluated": report.evaluated}
    return CommandOutput(payload, format_rational(report.oriented), [row])


def _orient_bicriteria(args, network: NetworkOverTime, jobs: int) -> CommandOutput:
    T = _horizon(args, network)
    result = bicriteria_orient(network, T)
    oriented = apply_orientation(network, result.orientation).with_horizon(result.horizon)
    problems = check_feasibility(result.flow, oriented)
    if problems:
        raise InfeasibleError("bicriteria witness failed re-validation: " + "; ".join(problems[:5]))
    best = max_flow_value(oriented, result.horizon)
    if best < result.value:
        raise InfeasibleError(f"oriented network only sends {best} < {result.value}")
    B = network.total_supply
    payload = {"algorithm": "bicriteria", "orientation": orientation_to_dict(result.orientation),
               "value": result.value, "horizon": result.horizon, "total_supply": B,
               "oriented_max_value": best, "witness": _revalidate(result.flow, result.value)}
    row = {"B": B, "value": result.value, "horizon": result.horizon, "oriented_max_value": best}
    return CommandOutput(payload, format_rational(result.value), [row])


def _orient_fixedpoint(args, network: NetworkOverTime, jobs: int) -> CommandOutput:
    T = _horizon(args, network)
    st = add_super_terminals(network)
    fixed_point = fixed_point_capacity_iteration(st, T, args.max_iter, args.tol, args.damping)
    if not fixed_point.converged:
        logger.warning(f"Fixed point status {fixed_point.status}; writing the partial report")
        payload = {"algorithm": "fixedpoint", "status": fixed_point.status,
                   "fixed_point": fixed_point.to_dict()}
        row = {"status": fixed_point.status, "iterations": fixed_point.iterations,
               "residual": fixed_point.residual, "balanced": fixed_point.balanced}
        return CommandOutput(payload, fixed_point.status, [row], exit_code=4)

    result = orient_one_third(network, T, fixed_point=fixed_point)
    again = max_flow_value(apply_orientation(network, result.orientation), T)
    if again != result.certified_value:
        raise InfeasibleError(f"re-solving the orientation gave {again}, certified {result.certified_value}")
    B = network.total_supply
    payload = {"algorithm": "fixedpoint", "status": fixed_point.status,
               "orientation": orientation_to_dict(result.orientation),
               "certified_value": result.certified_value, "total_supply": B,
               "meets_bound": result.meets_bound, "fixed_point": fixed_point.to_dict(),
               "partition": result.partition.to_dict(),
               "witness": _revalidate(result.flow, result.certified_value)}
    row = {"status": fixed_point.status, "iterations": fixed_point.iterations, "B": B,
           "certified_value": result.certified_value, "partition_bound": result.partition.bound}
    return CommandOutput(payload, format_rational(result.certified_value), [row])


def cmd_orient(args, jobs: int) -> CommandOutput:
    network = load_network(args.instance)
    handler = {"bruteforce": _orient_bruteforce, "bicriteria": _orient_bicriteria,
               "fixedpoint": _orient_fixedpoint}[args.algorithm]
    return handler(args, network, jobs)


def _price_row(report) -> dict:
    return {"undirected": report.undirected, "oriented": report.oriented, "ratio": report.ratio}


def _export_rows(args, rows: List[dict]):
    exporter = ExportManager()
    if args.excel:
        exporter.export_to_excel(rows, filename=args.excel)
    if args.csv:
        exporter.export_to_csv(rows, filename=args.csv)


def cmd_price(args, jobs: int) -> CommandOutput:
    if args.sweep:
        if not args.family:
            raise ValidationError("--sweep needs --family")
        entries = []
        rows = []
        for text in args.sweep:
            params = _parse_sweep_entry(text)
            network = build_family(args.family, **params)
            T = network.horizon if args.kind == "flow" else None
            if args.kind == "flow" and T is not None and T > ORACLE_CAPS["max_T"]:
                raise CapExceededError(f"horizon {T} exceeds the cap of {ORACLE_CAPS['max_T']}")
            report = brute_force_best_orientation(network, args.kind, T, jobs, cap=args.max_m)
            entries.append({"params": params, "report": report.to_dict()})
            rows.append({**{k: params[k] for k in sorted(params)}, **_price_row(report)})
        ratios = [row["ratio"] for row in rows]
        increasing = all(a < b for a, b in zip(ratios, ratios[1:]))
        payload = {"kind": args.kind, "family": args.family, "sweep": entries,
                   "strictly_increasing": increasing}
        _export_rows(args, rows)
        return CommandOutput(payload, ", ".join(format_rational(r) for r in ratios), rows)

    network = load_network(_require_file(args.instance, "an instance"))
    T = _horizon(args, network, required=args.kind == "flow")
    report = brute_force_best_orientation(network, args.kind, T, jobs, cap=args.max_m)
    again = evaluate_orientation(network, report.orientation, report.kind, T)
    if again != report.oriented:
        raise InfeasibleError(f"re-solving the best orientation gave {again}, reported {report.oriented}")
    rows = [_price_row(report)]
    _export_rows(args, rows)
    return CommandOutput(report.to_dict(), format_rational(report.ratio), rows)


def cmd_verify_reduction(args, jobs: int) -> CommandOutput:
    kind = args.kind
    if kind == "partition-max":
        report = verify_partition_maxfot(load_partition(_require_file(args.partition, "--partition")), jobs)
    else:
        formula = load_cnf(_require_file(args.cnf, "--cnf"))
        if kind == "sat-quickest":
            report = verify_sat_quickest(formula, args.tau1, args.tau2, jobs, args.widen)
        elif kind == "sat-concurrent":
            report = verify_sat_concurrent(formula, jobs)
        else:
            report = verify_sat_mc_quickest(formula, args.C, jobs)
    if not report.holds:
        logger.warning(f"{kind}: measured {format_rational(report.measured)}, expected {report.expected}")
    row = {"kind": report.kind, "label": report.label, "expected": report.expected,
           "measured": report.measured, "holds": report.holds}
    return CommandOutput(report.to_dict(), format_rational(report.measured), [row])


def cmd_pattern(args, jobs: int) -> CommandOutput:
    network = load_network(args.instance)
    T_max = _horizon(args, network)
    p = earliest_arrival_pattern(network, T_max, jobs)
    patterns = {"undirected": p}
    payload = {"T_max": T_max, "pattern": [p[t] for t in sorted(p)]}
    if args.orientation:
        orientation = _load_orientation(args.orientation)
        curve = earliest_arrival_pattern(apply_orientation(network, orientation), T_max, jobs)
        alpha, attained = minimal_alpha(curve, p)
        patterns["oriented"] = curve
        payload["oriented"] = {"orientation": orientation_to_dict(orientation),
                               "pattern": [curve[t] for t in sorted(curve)],
                               "alpha": alpha, "alpha_attained": attained, "beta": minimal_beta(curve, p)}
    return CommandOutput(payload, format_rational(p[T_max]), pattern_rows(patterns),
                         ["theta"] + list(patterns), patterns=patterns)


def cmd_eaf_experiment(args, jobs: int) -> CommandOutput:
    network = load_network(args.instance)
    T_max = _horizon(args, network)
    report = eaf_contraflow_experiment(network, T_max, jobs, args.reference_T, args.max_m)
    rows = [{"orientation": orientation_label(row.orientation),
             "alpha": row.alpha, "alpha_attained": row.alpha_attained, "beta": row.beta}
            for row in report.rows]
    patterns = {"undirected": report.pattern}
    for row in report.rows:
        patterns[orientation_label(row.orientation)] = row.pattern
    return CommandOutput(report.to_dict(),
                         f"alpha {format_rational(report.best_alpha)}, beta {format_rational(report.best_beta)}",
                         rows, patterns=patterns)


def _run_row(run) -> dict:
    return {"run_id": run.run_id, "command": run.command, "target": run.target, "status": run.status,
            "exit_code": run.exit_code, "value": run.value, "started_at": format_datetime(run.started_at)}


def cmd_history(args, jobs: int) -> CommandOutput:
    limit = args.limit or DATABASE_CONFIG["recent_limit"]
    if args.run_id:
        run = ExperimentRunOperations.get_run(args.run_id)
        if run is None:
            raise ValidationError(f"no recorded run {args.run_id!r}")
        payload = {**_run_row(run), "parameters": json.loads(run.parameters or "{}"),
                   "result_path": run.result_path, "message": run.message,
                   "finished_at": format_datetime(run.finished_at)}
        return CommandOutput(payload, run.status, [_run_row(run)])

    if args.logs:
        rows = [{"timestamp": format_datetime(entry.timestamp), "level": entry.level,
                 "module": entry.module, "run_id": entry.run_id, "message": entry.message}
                for entry in SystemLogOperations.get_recent_logs(limit)]
        return CommandOutput(rows, f"{len(rows)} log entries", rows)

    runs = ExperimentRunOperations.get_recent_runs(limit, args.filter_command)
    rows = [_run_row(run) for run in runs]
    return CommandOutput(rows, f"{len(rows)} runs", rows)


HANDLERS: Dict[str, Callable] = {
    "generate": cmd_generate,
    "solve": cmd_solve,
    "orient": cmd_orient,
    "price": cmd_price,
    "verify-reduction": cmd_verify_reduction,
    "pattern": cmd_pattern,
    "eaf-experiment": cmd_eaf_experiment,
    "history": cmd_history,
}


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    common.add_argument("-j", "--jobs", type=int, default=None,
                        help="worker processes (default TEMPOFLOW_JOBS, else 1)")
    common.add_argument("-o", "--out", default=None, help="result JSON path (default: stdout)")
    common.add_argument("--table", action="store_true", help="print an aligned table instead of JSON")
    common.add_argument("--no-record", action="store_true", help="do not record the run in the history")

    horizon = argparse.ArgumentParser(add_help=False)
    horizon.add_argument("--T", type=int, default=None, help="time horizon (default: the instance's)")
    horizon.add_argument("--max-T", type=int, default=None, dest="max_T",
                         help=f"horizon cap (default {ORACLE_CAPS['max_T']})")

    caps = argparse.ArgumentParser(add_help=False)
    caps.add_argument("--max-m", type=int, default=None, dest="max_m",
                      help=f"largest edge count enumerated (default {ORACLE_CAPS['max_m']})")

    sat = argparse.ArgumentParser(add_help=False)
    sat.add_argument("--cnf", default=None, help="DIMACS CNF file")
    sat.add_argument("--partition", default=None, help="PARTITION file (whitespace-separated integers)")
    sat.add_argument("--tau1", type=int, default=2)
    sat.add_argument("--tau2", type=int, default=0)
    sat.add_argument("--C", type=int, default=2, help="capacity scale of the multicommodity reduction")

    parser = argparse.ArgumentParser(prog="tempoflow",
                                     description="Flows over time, orientations and contraflow experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", parents=[common, sat], help="write an instance")
    p.add_argument("family", choices=GENERATE_CHOICES)
    p.add_argument("--T", type=int, default=None)
    p.add_argument("--delta", type=parse_rational, default=None)
    p.add_argument("--eps", type=parse_rational, default=None)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--U", type=parse_rational, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--sources", type=int, default=None)
    p.add_argument("--sinks", type=int, default=None)

    p = sub.add_parser("solve", parents=[common, horizon], help="max flow over time, quickest time or pattern")
    p.add_argument("instance")
    p.add_argument("--mode", choices=["maxfot", "quickest", "pattern"], default="maxfot")

    p = sub.add_parser("orient", parents=[common, horizon, caps], help="orient an undirected network")
    p.add_argument("instance")
    p.add_argument("--algorithm", choices=["bruteforce", "bicriteria", "fixedpoint"], default="bruteforce")
    p.add_argument("--objective", choices=["flow", "time"], default="flow")
    p.add_argument("--max-iter", type=int, default=ORIENTATION_SETTINGS["max_iter"], dest="max_iter")
    p.add_argument("--tol", type=parse_rational, default=None)
    p.add_argument("--damping", type=parse_rational, default=None)

    p = sub.add_parser("price", parents=[common, horizon, caps], help="price of orientation")
    p.add_argument("instance", nargs="?", default=None)
    p.add_argument("--kind", choices=["flow", "time"], default="flow")
    p.add_argument("--family", choices=list(FAMILIES), default=None)
    p.add_argument("--sweep", action="append", default=None, metavar="KEY=VALUE,...",
                   help="one generated instance per occurrence, e.g. T=8,delta=1/4,eps=1")
    p.add_argument("--excel", default=None, help="also export the rows to this .xlsx file")
    p.add_argument("--csv", default=None, help="also export the rows to this .csv file")

    p = sub.add_parser("verify-reduction", parents=[common, sat], help="measure a reduction's gap")
    p.add_argument("kind", choices=list(REDUCTIONS))
    p.add_argument("--widen", action="store_true", help="also enumerate the source-side literal edges")

    p = sub.add_parser("pattern", parents=[common, horizon], help="earliest arrival pattern")
    p.add_argument("instance")
    p.add_argument("--orientation", default=None, help="orientation JSON to compare against")
    p.add_argument("--plot", default=None, help="save the curves as an image")

    p = sub.add_parser("eaf-experiment", parents=[common, horizon, caps],
                       help="alpha/beta of every orientation against the undirected pattern")
    p.add_argument("instance")
    p.add_argument("--reference-T", type=int, default=None, dest="reference_T")
    p.add_argument("--plot", default=None, help="save all curves as an image")

    p = sub.add_parser("history", parents=[common], help="recently recorded runs")
    p.add_argument("--limit", type=int, default=None)
    p.add_argument("--command", dest="filter_command", default=None)
    p.add_argument("--run-id", dest="run_id", default=None, help="show one run with its parameters")
    p.add_argument("--logs", action="store_true", help="list recent log entries instead of runs")
    return parser


def _check_config(args):
    for name in ("max_m", "max_T", "max_iter", "limit"):
        value = getattr(args, name, None)
        if value is not None and value < 1:
            raise ValidationError(f"--{name.replace('_', '-')} must be positive")
    tol = getattr(args, "tol", None)
    if tol is not None and not tol > 0:
        raise ValidationError("--tol must be positive")
    if getattr(args, "T", None) is not None and args.T < 0:
        raise ValidationError("--T must be nonnegative")


def _target(args) -> Optional[str]:
    for name in ("instance", "family", "kind"):
        value = getattr(args, name, None)
        if value:
            return str(value)
    return None


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    set_verbose(args.verbose)
    record = DATABASE_CONFIG["record_runs"] and not args.no_record and args.command != "history"
    run_id = generate_run_id()
    if record:
        parameters = {k: v for k, v in vars(args).items() if k not in ("verbose", "no_record", "table")}
        ExperimentRunOperations.start_run(run_id, args.command, _target(args), parameters)

    try:
        _check_config(args)
        jobs = resolve_jobs(args.jobs)
        output = HANDLERS[args.command](args, jobs)
    except (TempoflowError, OSError) as e:
        exit_code = getattr(e, "exit_code", ValidationError.exit_code)
        logger.error(f"{args.command} failed: {str(e)}")
        print(f"error: {str(e)}", file=sys.stderr)
        if record:
            ExperimentRunOperations.finish_run(run_id, "failed", exit_code, message=str(e))
            SystemLogOperations.log("ERROR", args.command, str(e), run_id)
        return exit_code

    exporter = ExportManager()
    result_path = None
    if args.out:
        result_path = exporter.write_result(output.payload, args.out, run_id, args.command)
    plot = getattr(args, "plot", None)
    if plot and output.patterns:
        exporter.plot_arrival_patterns(output.patterns, plot)
    if args.table and output.rows is not None:
        print(exporter.render_table(output.rows, output.columns))
    elif result_path is None:
        print(dumps_canonical(output.payload), end="")
    else:
        print(f"{args.command}: {output.headline} -> {result_path}")

    status = "completed" if output.exit_code == 0 else "not-converged"
    if record:
        ExperimentRunOperations.finish_run(run_id, status, output.exit_code, output.headline, result_path)
        SystemLogOperations.log("INFO", args.command, f"{status}: {output.headline}", run_id)
    logger.info(f"{args.command} {status}: {output.headline}")
    return output.exit_code


if __name__ == "__main__":
    sys.exit(main())
