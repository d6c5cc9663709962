"""Command-line interface: ``powerpacket solve|tables|validate``.

Exit codes: 0 success, 1 parse/validation error, 2 solver error,
3 oracle or table mismatch. Errors are written to stderr as one JSON line.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import report
from .errors import SolverError, TooLarge, ValidationError
from .problemfile import load_problem
from .scenarios import build_mesh, build_scenario, oracle_cost, table_configurations
from .solver import DEFAULT_MAX_ITERS, solve
from .spm import from_flow

EXIT_OK, EXIT_INPUT, EXIT_SOLVER, EXIT_MISMATCH = 0, 1, 2, 3


def _fail(code: int, exc_or_kind, message: str | None = None) -> int:
    kind = exc_or_kind if isinstance(exc_or_kind, str) else type(exc_or_kind).__name__
    message = message if message is not None else str(exc_or_kind)
    print(json.dumps({"error": kind, "message": message, "exit_code": code}), file=sys.stderr)
    return code


def cmd_solve(args) -> int:
    try:
        problem = load_problem(args.problem)
    except (ValidationError, OverflowError) as exc:
        return _fail(EXIT_INPUT, exc)
    try:
        sol = solve(problem, max_iters=args.max_iters)
    except SolverError as exc:
        return _fail(EXIT_SOLVER, exc)

    if args.format == "json":
        sys.stdout.write(report.dumps_json_report(sol))
    else:
        sys.stdout.write(report.text_report(sol))
    for w in report.warnings(sol):
        print(f"warning: {w}", file=sys.stderr)
    if args.dot:
        Path(args.dot).write_text(report.to_dot(sol))
    if args.spm:
        Path(args.spm).write_text(from_flow(sol.u).dumps() + "\n")
    if args.oracle:
        try:
            expected = oracle_cost(problem)
        except TooLarge as exc:
            return _fail(EXIT_SOLVER, exc)
        if expected != sol.cost:
            return _fail(EXIT_MISMATCH, "OracleMismatch",
                         f"solver cost {report.number(sol.cost)} != oracle cost {report.number(expected)}")
        if args.format != "json":
            print(f"oracle_cost: {report.number(expected)} (match)")
    return EXIT_OK


def _targets_label(targets) -> str:
    if isinstance(targets, tuple):
        return "(" + ",".join(str(x) for x in targets) + ")"
    return str(targets)


def cmd_tables(args) -> int:
    net = build_mesh()
    results = []
    for family, N, targets, expected in table_configurations(args.only):
        try:
            sol = solve(build_scenario(family, N, targets, net), max_iters=args.max_iters)
        except SolverError as exc:
            return _fail(EXIT_SOLVER, exc)
        results.append({
            "family": family.upper(),
            "N": N,
            "targets": list(targets) if isinstance(targets, tuple) else targets,
            "expected": expected,
            "computed": report.number(sol.cost),
            "match": sol.cost == expected,
        })
    matched = sum(r["match"] for r in results)
    if args.json:
        print(json.dumps({"results": results, "matched": matched, "total": len(results)}, indent=2))
    else:
        print(f"{'table':<6} {'N':>2}  {'targets':<14} {'expected':>8} {'computed':>8}  status")
        for r in results:
            status = "ok" if r["match"] else "MISMATCH"
            label = _targets_label(tuple(r["targets"]) if isinstance(r["targets"], list) else r["targets"])
            print(f"{r['family']:<6} {r['N']:>2}  {label:<14} {r['expected']:>8} {str(r['computed']):>8}  {status}")
        print(f"{matched}/{len(results)} match")
    return EXIT_OK if matched == len(results) else EXIT_MISMATCH


def cmd_validate(args) -> int:
    try:
        p = load_problem(args.problem)
    except (ValidationError, OverflowError) as exc:
        return _fail(EXIT_INPUT, exc)
    print(f"ok: {p.net.n_nodes} nodes, {p.net.n_arcs} arcs, N={p.N}, "
          f"{len(p.node_costs.members)} node-cost groups, {len(p.hard_zero)} hard-zero router nodes")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="powerpacket", description="Packetized power routing optimizer")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve a problem file and print a report")
    p.add_argument("problem", help="JSON problem file")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--dot", metavar="FILE", help="write the time-expanded flow as a DOT graph")
    p.add_argument("--spm", metavar="FILE", help="write the symbol propagation matrix as JSON")
    p.add_argument("--oracle", action="store_true", help="cross-check the cost with the brute-force oracle")
    p.add_argument("--seed", type=int, default=None, help="accepted for compatibility; solving is deterministic")
    p.add_argument("--max-iters", type=int, default=DEFAULT_MAX_ITERS)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("tables", help="reproduce the E1/E2/E3 cost tables")
    p.add_argument("--only", choices=("e1", "e2", "e3"))
    p.add_argument("--json", action="store_true")
    p.add_argument("--max-iters", type=int, default=DEFAULT_MAX_ITERS)
    p.set_defaults(func=cmd_tables)

    p = sub.add_parser("validate", help="parse and validate a problem file")
    p.add_argument("problem")
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
