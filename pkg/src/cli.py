"""
Command-line front end.

    python -m src canon "let a = {a}; a"
    python -m src eq "let a = {a}; a" "let b = {{b}}; b"
    python -m src totality russell --k 1 --strategies bare,singleton

Exit codes: 0 success, 1 negative decision (not bisimilar, not stratified,
not constructible), 2 usage or input error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence, TextIO

from pydantic import ValidationError

from src.config import load_config
from src.errors import WorkbenchError
from src.service import WorkbenchService, totality_response
from src.setlang import render_set, render_system
from src.totality import PRESETS, TotalityReport, format_term, split_strategies

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_NEGATIVE = 1
EXIT_USAGE = 2


class _Parser(argparse.ArgumentParser):
    """ArgumentParser that raises instead of exiting, so run() stays testable."""

    def error(self, message: str):
        raise _UsageError(f"{self.prog}: {message}")


class _UsageError(Exception):
    pass


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hyperset", description="Hyperset workbench")
    parser.add_argument("--config", help="path to workbench.yaml")
    parser.add_argument("--log-level", help="debug, info, warning, error")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("canon", help="canonical form of a set literal")
    p.add_argument("set")
    p.add_argument("--format", choices=["text", "json", "system"], default="text")

    p = sub.add_parser("eq", help="are two sets bisimilar")
    p.add_argument("a")
    p.add_argument("b")

    p = sub.add_parser("solve", help="solve the let-program in FILE")
    p.add_argument("file")

    p = sub.add_parser("replace", help="replace X by Y inside S")
    p.add_argument("s")
    p.add_argument("x")
    p.add_argument("y")

    p = sub.add_parser("stratify", help="levels or a cycle witness")
    p.add_argument("formula", help=f"formula text or preset ({', '.join(PRESETS)})")

    p = sub.add_parser("eval", help="evaluate a formula over a finite universe")
    p.add_argument("formula")
    p.add_argument("--env", action="append", default=[], metavar="NAME=LITERAL")
    p.add_argument("--k", type=int, default=2)

    p = sub.add_parser("universe", help="list every set with at most K nodes")
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--format", choices=["text", "json"], default="text")

    p = sub.add_parser("totality", help="ideal and complete totality of a predicate")
    p.add_argument("formula", help=f"formula text or preset ({', '.join(PRESETS)})")
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--strategies", help="comma-separated, e.g. bare,singleton,pair-with({})")
    p.add_argument("--term", action="append", default=[], metavar="LITERAL",
                   help="placeholder term containing @I, e.g. '{@I, {}}'")
    p.add_argument("--budget", type=int)
    p.add_argument("--const", action="append", default=[], metavar="NAME=LITERAL")
    p.add_argument("--format", choices=["text", "json"], default="text")

    p = sub.add_parser("constructible", help="is Y n-constructible from X")
    p.add_argument("x")
    p.add_argument("y")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--width", type=int, default=2)

    p = sub.add_parser("dot", help="Graphviz picture of a set")
    p.add_argument("set")
    p.add_argument("-o", "--output", help="write to FILE instead of stdout")

    return parser


def _assignments(items: Sequence[str], flag: str) -> dict[str, str]:
    out: dict[str, str] = {}
    for item in items:
        name, sep, literal = item.partition("=")
        if not sep or not name.strip():
            raise WorkbenchError(f"{flag} expects NAME=LITERAL, got {item!r}", token=flag)
        out[name.strip()] = literal
    return out


def format_report(report: TotalityReport) -> str:
    """Human-readable totality report."""
    lines = [
        f"predicate: {report.predicate}",
        f"variable: {report.variable}",
        f"k: {report.k}",
        f"ideal ({len(report.ideal_elements)}):",
    ]
    lines += [f"  {render_set(e)}" for e in report.ideal_elements]
    verdict = "yes" if report.ideal_satisfies else "no"
    lines.append(f"ideal aggregate: {render_set(report.ideal_aggregate)} (satisfies: {verdict})")
    lines.append(f"terms ({len(report.trials)}):")
    for trial in report.trials:
        status = "accepted" if trial.accepted else "rejected"
        if trial.identified_with:
            status += f", identified with {trial.identified_with}"
        lines.append(f"  {format_term(trial.term)}: {status}")
    lines.append("equation:")
    lines += [f"  {line}" for line in render_system(report.equation).splitlines()]
    lines.append(f"complete: {render_set(report.complete)}")
    lines.append(f"intruders ({len(report.intruders)}):")
    lines += [f"  {render_set(i)}" for i in report.intruders]
    if report.warnings:
        lines.append("warnings:")
        lines += [f"  {w}" for w in report.warnings]
    return "\n".join(lines)


def _dispatch(args: argparse.Namespace, service: WorkbenchService, out: TextIO) -> int:
    if args.command == "canon":
        if args.format == "system":
            print(service.canon_system(args.set), file=out)
            return EXIT_OK
        view = service.canon(args.set)
        print(view.model_dump_json(indent=2) if args.format == "json" else view.text, file=out)
        return EXIT_OK

    if args.command == "eq":
        same = service.eq(args.a, args.b).bisimilar
        print("bisimilar" if same else "not bisimilar", file=out)
        return EXIT_OK if same else EXIT_NEGATIVE

    if args.command == "solve":
        text = Path(args.file).read_text(encoding="utf-8")
        for name, view in service.solve(text).solution.items():
            print(f"{name} = {view.text}", file=out)
        return EXIT_OK

    if args.command == "replace":
        print(service.replace(args.s, args.x, args.y).text, file=out)
        return EXIT_OK

    if args.command == "stratify":
        result = service.stratify(args.formula)
        if result.stratified:
            print("stratified", file=out)
            for name, level in result.levels.items():
                print(f"  {name}: {level}", file=out)
            return EXIT_OK
        print(f"not stratified (cycle weight {result.witness_weight})", file=out)
        for step in result.witness:
            print(f"  {step.atom}: {step.source} -> {step.target} ({step.weight:+d})", file=out)
        return EXIT_NEGATIVE

    if args.command == "eval":
        env = _assignments(args.env, "--env")
        value = service.evaluate(args.formula, env, args.k).value
        print("true" if value else "false", file=out)
        return EXIT_OK

    if args.command == "universe":
        view = service.universe_view(args.k)
        if args.format == "json":
            print(view.model_dump_json(indent=2), file=out)
        else:
            print(f"k={view.k}: {view.count} sets", file=out)
            for m in view.members:
                wf = "wf" if m.well_founded else "non-wf"
                print(f"  [{m.index}] {m.text}  ({m.nodes} nodes, {wf})", file=out)
        return EXIT_OK

    if args.command == "totality":
        strategies = None if args.strategies is None else split_strategies(args.strategies)
        report = service.totality(
            args.formula,
            args.k,
            strategies=strategies,
            budget=args.budget,
            terms=args.term,
            constants=_assignments(args.const, "--const"),
        )
        if args.format == "json":
            print(totality_response(report).model_dump_json(indent=2), file=out)
        else:
            print(format_report(report), file=out)
        return EXIT_OK

    if args.command == "constructible":
        result = service.constructible(args.x, args.y, args.n, args.width)
        if result.constructible:
            print(f"constructible (least n = {result.least_n})", file=out)
            return EXIT_OK
        print(f"not constructible within n = {result.n}", file=out)
        return EXIT_NEGATIVE

    if args.command == "dot":
        text = service.dot(args.set)
        if args.output:
            Path(args.output).write_text(text, encoding="utf-8")
        else:
            out.write(text)
        return EXIT_OK

    raise _UsageError(f"unknown command {args.command!r}")


def run(
    argv: Optional[Sequence[str]] = None,
    stdout: Optional[TextIO] = None,
    stderr: Optional[TextIO] = None,
) -> int:
    """Parse argv, run one command, return the exit code."""
    out = stdout or sys.stdout
    err = stderr or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        config = load_config(args.config)
        level = (args.log_level or config.log_level).upper()
        logging.basicConfig(
            level=getattr(logging, level, logging.INFO),
            format="%(asctime)s %(levelname)s %(name)s: %(message)s",
            stream=err,
        )
        return _dispatch(args, WorkbenchService(config), out)
    except _UsageError as exc:
        print(str(exc), file=err)
        return EXIT_USAGE
    except WorkbenchError as exc:
        token = f" [{exc.token}]" if exc.token else ""
        print(f"error ({exc.code.value}){token}: {exc}", file=err)
        return EXIT_USAGE
    except (OSError, ValidationError) as exc:
        print(f"error: {exc}", file=err)
        return EXIT_USAGE


def main() -> None:
    sys.exit(run())
