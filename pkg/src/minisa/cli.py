"""Command-line entry point: ``minisa analyze | print | diff``."""

from __future__ import annotations

import argparse
import json
import sys
from collections import Counter
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional, TextIO

from minisa import __version__
from minisa.cfg import build_all
from minisa.checkers import ALL_IDS, list_checkers, path_checkers
from minisa.dataflow import MergeMode, flow_div_zero_check, uninit_check
from minisa.errors import FrontendError
from minisa.frontend import TranslationUnit, ast, compile_source
from minisa.matcher import style_checks
from minisa.report import (
    Run,
    apply_suppressions,
    dedup_sorted,
    diff_runs,
    dumps_run,
    loads_run,
    parse_suppression_file,
    render,
    render_report,
    report_count_line,
)
from minisa.symexec import AnalysisBudget, analyze_program

EXIT_CLEAN, EXIT_REPORTS, EXIT_ERROR = 0, 1, 2


class UsageError(Exception):
    pass


def _csv(text: str) -> list[str]:
    return [s.strip() for s in text.split(",") if s.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="minisa",
        description="Static analysis for MiniC: token/AST matching, dataflow and symbolic execution.",
        fromfile_prefix_chars="@",
    )
    parser.add_argument("--version", action="version", version=f"minisa {__version__}")
    parser.add_argument("--list-checkers", action="store_true", help="print checker ids and exit")
    sub = parser.add_subparsers(dest="command")

    an = sub.add_parser("analyze", help="analyze MiniC files", fromfile_prefix_chars="@")
    an.add_argument("inputs", nargs="+", help="source files, or @listfile with one path per line")
    an.add_argument("--checkers", type=_csv, default=None, help="comma-separated checker ids (default: all)")
    an.add_argument("--flow-mode", choices=["may", "must"], default="must", help="merge mode of the flow checks")
    an.add_argument("--budget", default="", help="budget overrides, e.g. maxCallDepth=2,maxNodes=1000")
    an.add_argument("--suppress", type=Path, help="suppression rule file")
    an.add_argument("-o", "--output", type=Path, help="write the run as JSON here")
    an.add_argument("--run-name", default="minisa")
    an.add_argument("--timestamp", help="override the run timestamp (for reproducible output)")
    an.add_argument("--no-gc", action="store_true", help="disable dead-symbol collection")
    for flag in ("cfg", "exploded-graph", "ast", "tokens"):
        an.add_argument(
            f"--dump-{flag}",
            nargs="?",
            const="-",
            default=None,
            metavar="PATH",
            help=f"write the {flag.replace('-', ' ')} as JSON (default: stdout)",
        )

    pr = sub.add_parser("print", help="render a stored run")
    pr.add_argument("run", type=Path)
    pr.add_argument("--format", choices=["text", "json"], default="text")

    df = sub.add_parser("diff", help="compare two stored runs")
    df.add_argument("old", type=Path)
    df.add_argument("new", type=Path)
    which = df.add_mutually_exclusive_group()
    which.add_argument("--new", dest="show", action="store_const", const="new")
    which.add_argument("--resolved", dest="show", action="store_const", const="resolved")
    return parser


# -- dumps ----------------------------------------------------------------------------


def ast_json(node: ast.Node) -> dict:
    out = {"id": node.id, "kind": node.kind, "line": node.loc.line, "col": node.loc.column}
    for k in ("name", "op", "value", "by_ref", "array_len", "return_type"):
        v = getattr(node, k, None)
        # Child nodes (e.g. an assignment's value) are emitted under "children".
        if v is not None and not isinstance(v, ast.Node):
            out[k] = v
    if node.type is not None:
        out["type"] = str(node.type)
    kids = node.children()
    if kids:
        out["children"] = [ast_json(c) for c in kids]
    return out


def tokens_json(tu: TranslationUnit) -> list[dict]:
    return [{"kind": t.kind.value, "text": t.text, "line": t.loc.line, "col": t.loc.column} for t in tu.tokens]


class _Dumps:
    def __init__(self):
        self.data: dict[str, list] = {}

    def add(self, flag: str, items: list) -> None:
        self.data.setdefault(flag, []).extend(items)

    def write(self, flag: str, target: Optional[str], stdout: TextIO) -> None:
        if target is None:
            return
        text = json.dumps(self.data.get(flag, []), indent=2, ensure_ascii=False) + "\n"
        if target == "-":
            stdout.write(text)
        else:
            Path(target).write_text(text, encoding="utf-8")


# -- commands ----------------------------------------------------------------------


def analyze_file(tu: TranslationUnit, enabled: set[str], mode: MergeMode, budget: AnalysisBudget, gc: bool):
    """All reports, engine stats, sa_dump lines, CFGs and exploded graphs of one unit."""
    reports = style_checks(tu, enabled)
    cfgs = build_all(tu.info)
    for cfg in cfgs.values():
        if "flow.DivideByZero" in enabled:
            reports.extend(flow_div_zero_check(cfg, mode))
        if "flow.UninitVar" in enabled:
            reports.extend(uninit_check(cfg))
    result = analyze_program(tu.info, budget, path_checkers(enabled), gc=gc, cfgs=cfgs)
    reports.extend(result.reports)
    return reports, result, cfgs


def cmd_analyze(args, stdout: TextIO, stderr: TextIO) -> int:
    enabled = set(args.checkers) if args.checkers is not None else set(ALL_IDS)
    unknown = enabled - set(ALL_IDS)
    if unknown:
        raise UsageError(f"unknown checker id(s): {', '.join(sorted(unknown))}")
    try:
        budget = AnalysisBudget.parse(args.budget)
    except ValueError as e:
        raise UsageError(str(e)) from None
    mode = MergeMode(args.flow_mode)
    rules = []
    if args.suppress is not None:
        try:
            rules = parse_suppression_file(args.suppress.read_text(encoding="utf-8"))
        except (OSError, ValueError) as e:
            raise UsageError(f"{args.suppress}: {e}") from None

    reports, sources, dump_lines = [], {}, []
    stats: Counter = Counter()
    dumps = _Dumps()
    for name in args.inputs:
        path = Path(name)
        try:
            source = path.read_text(encoding="utf-8")
        except OSError as e:
            raise UsageError(f"{name}: cannot read: {e.strerror or e}") from None
        try:
            tu = compile_source(source, str(path))
        except FrontendError as e:
            stderr.write(f"{e.loc}: error: {e.message}\n")
            return EXIT_ERROR
        sources[str(path)] = source
        file_reports, result, cfgs = analyze_file(tu, enabled, mode, budget, gc=not args.no_gc)
        reports.extend(file_reports)
        dump_lines.extend(result.dumps)
        for k, v in result.stats.items():
            stats[k] = max(stats[k], v) if k == "max_call_depth" else stats[k] + v
        stats["files"] += 1
        dumps.add("cfg", [{"file": str(path), **c.to_json()} for c in cfgs.values()])
        dumps.add("exploded-graph", [{"file": str(path), **g} for g in result.graph_json()])
        dumps.add("ast", [{"file": str(path), **ast_json(tu.surface)}])
        dumps.add("tokens", [{"file": str(path), "tokens": tokens_json(tu)}])

    timestamp = args.timestamp or datetime.now(timezone.utc).isoformat(timespec="seconds")
    run = Run(args.run_name, timestamp, __version__, dedup_sorted(reports), dict(stats))
    run, _ = apply_suppressions(run, rules, sources)

    for flag in ("cfg", "exploded-graph", "ast", "tokens"):
        dumps.write(flag, getattr(args, f"dump_{flag.replace('-', '_')}"), stdout)
    for line in dump_lines:
        stdout.write(line + "\n")
    if args.output is not None:
        args.output.write_text(dumps_run(run), encoding="utf-8")
    stdout.write(render(run, "text"))
    return EXIT_REPORTS if run.reports else EXIT_CLEAN


def _load_run(path: Path) -> Run:
    try:
        return loads_run(path.read_text(encoding="utf-8"))
    except OSError as e:
        raise UsageError(f"{path}: cannot read: {e.strerror or e}") from None
    except (ValueError, KeyError, TypeError) as e:
        raise UsageError(f"{path}: not a valid run file: {e}") from None


def cmd_print(args, stdout: TextIO, stderr: TextIO) -> int:
    stdout.write(render(_load_run(args.run), args.format))
    return EXIT_CLEAN


def cmd_diff(args, stdout: TextIO, stderr: TextIO) -> int:
    d = diff_runs(_load_run(args.old), _load_run(args.new))
    sections = {"new": ("New reports", d.new), "resolved": ("Resolved reports", d.resolved)}
    shown = [args.show] if args.show else ["new", "resolved"]
    total = 0
    for key in shown:
        title, reports = sections[key]
        stdout.write(f"{title}:\n")
        for r in reports:
            stdout.write(render_report(r) + "\n")
        stdout.write(report_count_line(len(reports)) + "\n")
        total += len(reports)
    return EXIT_REPORTS if total else EXIT_CLEAN


def main(argv: Optional[list[str]] = None, stdout: TextIO = None, stderr: TextIO = None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_ERROR if e.code else EXIT_CLEAN
    if args.list_checkers:
        stdout.write(list_checkers())
        return EXIT_CLEAN
    commands = {"analyze": cmd_analyze, "print": cmd_print, "diff": cmd_diff}
    if args.command not in commands:
        parser.print_usage(stderr)
        return EXIT_ERROR
    try:
        return commands[args.command](args, stdout, stderr)
    except UsageError as e:
        stderr.write(f"minisa: error: {e}\n")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
