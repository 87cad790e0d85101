"""Command line interface.

Inputs are a schema file, a constraint file, and a data directory holding
one <predicate>.csv per nonempty relation (plus an optional endogenous.txt
listing deletable tids).  Successful runs print one JSON object with a fixed
key set per command (or a plain-text rendering with --format text); errors
go to stderr with exit code 1 for bad input and 2 for exhausted budgets.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from fractions import Fraction
from pathlib import Path

from . import aspgen, exact, measures, nullrep, updates
from .conflicts import build_hypergraph, vertex_degrees
from .errors import (IncMeterError, InputError, ResourceLimitError,
                     SolverUnavailableError)
from .model import Instance, load_instance, parse_constraints, parse_schema


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on usage errors; route through InputError
    # so usage problems share exit code 1 with other bad input
    def error(self, message):
        raise InputError(message)


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise InputError(f"not a fraction: {text!r}") from None


def build_parser() -> _Parser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--schema", required=True, help="schema file")
    common.add_argument("--constraints", required=True, help="constraint file")
    common.add_argument("--data", required=True, help="directory of <pred>.csv files")
    common.add_argument("--endogenous", help="file of deletable tids "
                                             "(default: endogenous.txt in the data dir)")
    common.add_argument("--format", choices=("json", "text"), default="json")
    common.add_argument("--node-budget", type=int, default=exact.DEFAULT_NODE_BUDGET)

    parser = _Parser(prog="incmeter",
                     description="inconsistency measurement under denial constraints")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("measure", parents=[common],
                       help="inconsistency degree of the instance")
    p.add_argument("--solver", choices=("exact", "local-ratio", "randomized"),
                   default="exact")
    p.add_argument("--semantics", choices=("tuple", "endogenous", "null"),
                   default="tuple")
    p.add_argument("--normalization", choices=("db", "endogenous"), default="db")
    p.add_argument("--eps", type=_fraction, default=Fraction(1, 10))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--reps", type=int, default=5)

    p = sub.add_parser("repairs", parents=[common], help="enumerate repairs")
    p.add_argument("--enumerate", choices=("s", "c"), default="s", dest="which")
    p.add_argument("--enum-limit", type=int, default=measures.ENUM_LIMIT)

    p = sub.add_parser("alt-measures", parents=[common],
                       help="counting and Jaccard measure variants")
    p.add_argument("--enum-limit", type=int, default=measures.ENUM_LIMIT)

    p = sub.add_parser("emit-asp", parents=[common],
                       help="emit the repair logic program")
    p.add_argument("--style", choices=("disjunctive", "normal"), default="disjunctive")
    p.add_argument("--no-count", action="store_true")
    p.add_argument("--no-weak", action="store_true")
    p.add_argument("--output", help="write the program here instead of stdout")
    p.add_argument("--execute", action="store_true",
                   help="run the external solver on the program")
    p.add_argument("--solver-path", help="solver binary (default: $INCMETER_ASP_SOLVER)")

    p = sub.add_parser("update", parents=[common],
                       help="apply a delta and recompute incrementally")
    p.add_argument("--delta", required=True, help="delta file (+ rows, - tids)")
    p.add_argument("--check-bounds", action="store_true")

    sub.add_parser("conflicts", parents=[common], help="dump the conflict hypergraph")
    return parser


def _read(path_str: str, what: str) -> str:
    path = Path(path_str)
    if not path.is_file():
        raise InputError(f"{what} file not found: {path}")
    return path.read_text(encoding="utf-8")


def _load_bundle(args):
    schema = parse_schema(_read(args.schema, "schema"))
    constraints = parse_constraints(_read(args.constraints, "constraints"), schema)
    data_dir = Path(args.data)
    if not data_dir.is_dir():
        raise InputError(f"data directory not found: {data_dir}")
    sources = {}
    for path in sorted(data_dir.glob("*.csv")):
        name = path.stem
        if name not in schema:
            raise InputError(f"{path.name} does not match any schema predicate")
        sources[name] = path.read_text(encoding="utf-8")
    endo = None
    endo_path = Path(args.endogenous) if args.endogenous else data_dir / "endogenous.txt"
    if args.endogenous or endo_path.is_file():
        endo = _parse_endogenous(_read(str(endo_path), "endogenous"))
    instance = load_instance(sources, schema, endo)
    return schema, constraints, instance


def _parse_endogenous(text: str) -> list[int]:
    tids = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            tids.append(int(line))
        except ValueError:
            raise InputError(f"not a tid: {line!r}", line=lineno) from None
    return tids


def _emit(payload: dict, args, text_lines) -> None:
    if args.format == "json":
        print(json.dumps(payload, indent=2))
    else:
        for line in text_lines:
            print(line)


def _measure_payload(report: measures.MeasureReport) -> dict:
    payload = report.to_json_dict()
    payload["normalization"] = report.normalization
    payload["note"] = report.note
    changes = None
    if isinstance(report.witness, nullrep.NullRepairSolution):
        changes = [{"tid": c.tid, "position": c.position}
                   for c in sorted(report.witness.changes)]
    payload["witness_changes"] = changes
    return payload


def _cmd_measure(args) -> int:
    start = time.perf_counter()
    _, constraints, instance = _load_bundle(args)
    if args.semantics == "tuple":
        report = measures.inc_deg_g3(instance, constraints, solver=args.solver,
                                     eps=args.eps, seed=args.seed, reps=args.reps,
                                     node_budget=args.node_budget)
    elif args.semantics == "endogenous":
        norm = "db_size" if args.normalization == "db" else "endogenous_size"
        report = measures.inc_deg_g3_endogenous(instance, constraints,
                                                normalization=norm,
                                                node_budget=args.node_budget)
    else:
        report = nullrep.inc_deg_g3_null(instance, constraints,
                                         node_budget=args.node_budget)
    payload = {"command": "measure"}
    payload.update(_measure_payload(report))
    payload["elapsed_ms"] = round((time.perf_counter() - start) * 1000, 3)
    lines = [f"{report.kind} = {report.numerator}/{report.denominator}"
             f" ({float(report.value):.6g})",
             f"method: {report.method}  exact: {report.exact}"]
    if payload["witness_deleted_tids"] is not None:
        lines.append("deleted tids: " + " ".join(map(str, payload["witness_deleted_tids"])))
    if payload["witness_changes"] is not None:
        lines.append("cell changes: " + " ".join(
            f"{c['tid']}:{c['position']}" for c in payload["witness_changes"]))
    if report.note:
        lines.append("note: " + report.note)
    _emit(payload, args, lines)
    return 0


def _cmd_repairs(args) -> int:
    start = time.perf_counter()
    _, constraints, instance = _load_bundle(args)
    if args.which == "s":
        reps = exact.enumerate_s_repairs(instance, constraints, args.enum_limit)
    else:
        reps = exact.enumerate_c_repairs(instance, constraints, args.enum_limit)
    listed = [sorted(r) for r in reps.repairs]
    payload = {"command": "repairs", "kind": reps.kind, "count": len(listed),
               "repairs": listed,
               "elapsed_ms": round((time.perf_counter() - start) * 1000, 3)}
    lines = [f"{reps.kind}-repairs: {len(listed)}"]
    lines += ["  {" + ", ".join(map(str, r)) + "}" for r in listed]
    _emit(payload, args, lines)
    return 0


def _cmd_alt_measures(args) -> int:
    start = time.perf_counter()
    _, constraints, instance = _load_bundle(args)
    hg = build_hypergraph(instance, constraints)
    reports = [
        measures.measure_count_srep(instance, constraints, args.enum_limit, hg),
        measures.measure_count_all(instance, constraints, args.enum_limit, hg),
        measures.measure_jaccard(instance, constraints, args.enum_limit, hg),
    ]
    payload = {"command": "alt-measures",
               "measures": [_measure_payload(r) for r in reports],
               "elapsed_ms": round((time.perf_counter() - start) * 1000, 3)}
    lines = [f"{r.kind} = {r.numerator}/{r.denominator} ({float(r.value):.6g})"
             for r in reports]
    _emit(payload, args, lines)
    return 0


def _cmd_conflicts(args) -> int:
    start = time.perf_counter()
    _, constraints, instance = _load_bundle(args)
    hg = build_hypergraph(instance, constraints)
    degrees = vertex_degrees(hg)
    payload = {
        "command": "conflicts",
        "consistent": hg.is_consistent,
        "vertices": sorted(hg.vertices),
        "edges": [{"constraint": e.constraint, "tids": sorted(e.tids)}
                  for e in hg.edges],
        "solving_edges": [sorted(s) for s in hg.solving_edges],
        "d": hg.d,
        "max_degree": hg.max_degree,
        "degrees": {str(t): n for t, n in degrees.items()},
        "elapsed_ms": round((time.perf_counter() - start) * 1000, 3),
    }
    _emit(payload, args, hg.dump_lines())
    return 0


def _cmd_update(args) -> int:
    start = time.perf_counter()
    _, constraints, instance = _load_bundle(args)
    delta = updates.parse_delta(_read(args.delta, "delta"))
    hg_before = build_hypergraph(instance, constraints)
    hg_after = updates.incremental_hypergraph(hg_before, instance, delta, constraints)
    after = updates.apply_update(instance, delta)
    before_m = measures.inc_deg_g3(instance, constraints, hg_before,
                                   node_budget=args.node_budget)
    after_m = measures.inc_deg_g3(after, constraints, hg_after,
                                  node_budget=args.node_budget)
    bounds = None
    if args.check_bounds:
        if delta.is_insert_only:
            bounds = updates.check_insertion_bounds(
                instance, delta, constraints, args.node_budget, hg_before, hg_after)
        elif delta.is_delete_only:
            bounds = updates.check_deletion_bounds(
                instance, delta, constraints, args.node_budget, hg_before, hg_after)
        else:
            raise InputError("--check-bounds needs a pure insertion or pure "
                             "deletion delta")
    payload = {
        "command": "update",
        "size_before": len(instance),
        "size_after": len(after),
        "measure_before": _measure_payload(before_m),
        "measure_after": _measure_payload(after_m),
        "bounds": bounds.to_json_dict() if bounds else None,
        "elapsed_ms": round((time.perf_counter() - start) * 1000, 3),
    }
    lines = [
        f"size: {len(instance)} -> {len(after)}",
        f"measure: {before_m.numerator}/{before_m.denominator} -> "
        f"{after_m.numerator}/{after_m.denominator}",
    ]
    if bounds:
        lines.append(f"epsilon: {bounds.epsilon}  applicable: {bounds.applicable}")
        for b in bounds.bounds:
            lines.append(f"  {b.name}: {b.lhs} <= {b.rhs}  holds: {b.holds}")
    _emit(payload, args, lines)
    return 0


def _cmd_emit_asp(args) -> int:
    _, constraints, instance = _load_bundle(args)
    program = aspgen.emit_repair_program(instance, constraints, style=args.style,
                                         with_count=not args.no_count,
                                         with_weak=not args.no_weak)
    text = program.render()
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    execution = None
    if args.execute:
        result = aspgen.run_external_solver(program, args.solver_path)
        execution = {"dist": result["dist"],
                     "deleted": sorted(result["deleted"]),
                     "cost": result["cost"]}
    if args.output or args.execute:
        payload = {"command": "emit-asp",
                   "output": args.output,
                   "statements": len(program.facts) + len(program.rules)
                   + len(program.counting) + len(program.weak),
                   "execution": execution}
        lines = [f"wrote {args.output}" if args.output else "program not written"]
        if execution:
            lines.append(f"dist: {execution['dist']}  deleted: {execution['deleted']}")
        _emit(payload, args, lines)
    else:
        sys.stdout.write(text)
    return 0


_COMMANDS = {
    "measure": _cmd_measure,
    "repairs": _cmd_repairs,
    "alt-measures": _cmd_alt_measures,
    "emit-asp": _cmd_emit_asp,
    "update": _cmd_update,
    "conflicts": _cmd_conflicts,
}


def _error_code(exc: IncMeterError) -> str:
    if isinstance(exc, ResourceLimitError):
        return "resource-limit"
    if isinstance(exc, SolverUnavailableError):
        return "solver-unavailable"
    return "input"


def _fail(fmt: str, exc: IncMeterError) -> None:
    if fmt == "json":
        print(json.dumps({"error": _error_code(exc), "message": str(exc)}),
              file=sys.stderr)
    else:
        print(f"error: {exc}", file=sys.stderr)


def main(argv=None) -> int:
    parser = build_parser()
    # usage errors surface before --format is known; report those as text
    fmt = "text"
    try:
        args = parser.parse_args(argv)
        fmt = getattr(args, "format", "text")
        return _COMMANDS[args.command](args)
    except ResourceLimitError as exc:
        _fail(fmt, exc)
        return 2
    except IncMeterError as exc:
        _fail(fmt, exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())
