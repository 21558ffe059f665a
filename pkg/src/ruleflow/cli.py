"""Command-line entry point.

Commands::

    ruleflow rewrite --rules <dir> [--hit-log <file>] [--notebook-id <id>] <in> -o <out>
    ruleflow check-rule <file>
    ruleflow report [--format=tsv|pretty] <log>

Exit codes are frozen for the discovery pipeline: 0 ok, 1 I/O or parse
failure, 2 validation failure. The RULEFLOW_RULES environment variable
supplies the default rules directory.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from ruleflow import corpus as corpus_mod
from ruleflow import rewriter, subject_ast
from ruleflow.rule_dsl import RuleError, parse_rule_file, validate_rule

EXIT_OK = 0
EXIT_IO = 1
EXIT_VALIDATION = 2


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ruleflow")
    sub = parser.add_subparsers(dest="command", required=True)

    p_rewrite = sub.add_parser("rewrite", help="apply the rule corpus to a script or notebook")
    p_rewrite.add_argument("input")
    p_rewrite.add_argument("-o", "--output", required=True)
    p_rewrite.add_argument("--rules", default=os.environ.get("RULEFLOW_RULES"))
    p_rewrite.add_argument("--hit-log")
    p_rewrite.add_argument("--notebook-id")

    p_check = sub.add_parser("check-rule", help="parse and validate a single rule file")
    p_check.add_argument("file")

    p_report = sub.add_parser("report", help="aggregate a hit log")
    p_report.add_argument("log")
    p_report.add_argument("--format", choices=("tsv", "pretty"), default="pretty")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "rewrite":
        return cmd_rewrite(args)
    if args.command == "check-rule":
        return cmd_check_rule(args.file)
    return cmd_report(args.log, args.format)


def cmd_rewrite(args: argparse.Namespace) -> int:
    if not args.rules:
        print("error: no rules directory (--rules or RULEFLOW_RULES)", file=sys.stderr)
        return EXIT_IO
    try:
        rule_corpus = corpus_mod.load_corpus(args.rules)
    except (OSError, RuleError) as exc:
        print(f"error: failed to load rules: {exc}", file=sys.stderr)
        return EXIT_IO

    in_path = Path(args.input)
    notebook_id = args.notebook_id or in_path.stem
    hit_log = None
    if args.hit_log:
        hit_log = corpus_mod.HitLog(
            path=Path(args.hit_log), known_rule_ids=frozenset(rule_corpus.by_id)
        )

    try:
        if in_path.suffix == ".ipynb":
            summary = _rewrite_notebook(in_path, Path(args.output), rule_corpus, notebook_id, hit_log)
        else:
            summary = _rewrite_script(in_path, Path(args.output), rule_corpus, notebook_id, hit_log)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except SyntaxError as exc:
        print(f"error: cannot parse {in_path}: {exc}", file=sys.stderr)
        return EXIT_IO

    for cell_index, count in summary:
        print(f"cell {cell_index}: {count} application(s)")
    print(f"total applications: {sum(count for _, count in summary)}")
    return EXIT_OK


def _record_hits(hit_log, result, notebook_id: str, cell_index: int) -> None:
    if hit_log is None:
        return
    for application in result.applications:
        corpus_mod.record_hit(hit_log, application.rule_id, notebook_id, cell_index)


def _rewrite_script(
    in_path: Path, out_path: Path, rule_corpus, notebook_id: str, hit_log
) -> list[tuple[int, int]]:
    cell = subject_ast.parse_source(in_path.read_text(encoding="utf-8"))
    result = rewriter.rewrite_cell(cell, rule_corpus)
    out_path.write_text(subject_ast.print_source(result.ast), encoding="utf-8")
    _record_hits(hit_log, result, notebook_id, 0)
    return [(0, len(result.applications))]


def _rewrite_notebook(
    in_path: Path, out_path: Path, rule_corpus, notebook_id: str, hit_log
) -> list[tuple[int, int]]:
    document = json.loads(in_path.read_text(encoding="utf-8"))
    summary: list[tuple[int, int]] = []
    for cell_index, cell in enumerate(document.get("cells", [])):
        if cell.get("cell_type") != "code":
            continue
        source = "".join(cell.get("source", []))
        if not source.strip():
            summary.append((cell_index, 0))
            continue
        parsed = subject_ast.parse_source(source)
        result = rewriter.rewrite_cell(parsed, rule_corpus)
        cell["source"] = subject_ast.print_source(result.ast).splitlines(keepends=True)
        _record_hits(hit_log, result, notebook_id, cell_index)
        summary.append((cell_index, len(result.applications)))
    out_path.write_text(json.dumps(document, indent=1, ensure_ascii=False) + "\n", encoding="utf-8")
    return summary


def cmd_check_rule(file: str) -> int:
    try:
        text = Path(file).read_text(encoding="utf-8")
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        rule = parse_rule_file(text)
    except RuleError as exc:
        print(f"{exc.code}\t{exc.section}\t{exc.message}")
        return EXIT_VALIDATION
    diagnostics = validate_rule(rule)
    if diagnostics:
        for diag in diagnostics:
            print(f"{diag.code}\t{diag.section}\t{diag.message}")
        return EXIT_VALIDATION
    print(f"OK {rule.id}")
    return EXIT_OK


def cmd_report(log_path: str, fmt: str) -> int:
    try:
        log = corpus_mod.parse_hit_log(log_path)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except RuleError as exc:
        print(f"error: {exc.message}", file=sys.stderr)
        return EXIT_IO
    rep = corpus_mod.report(log)

    rule_rows = [
        (rule_id, rep.rule_applications[rule_id], rep.rule_notebooks[rule_id])
        for rule_id in sorted(rep.rule_applications)
    ]
    nb_rows = [
        (nb, rep.notebook_applications[nb], rep.notebook_rules[nb])
        for nb in sorted(rep.notebook_applications)
    ]
    if fmt == "tsv":
        print("rule_id\tapplications\tdistinct_notebooks")
        for row in rule_rows:
            print("\t".join(str(v) for v in row))
        print("notebook_id\tapplications\tdistinct_rules")
        for row in nb_rows:
            print("\t".join(str(v) for v in row))
    else:
        _print_table(("rule_id", "applications", "distinct_notebooks"), rule_rows)
        print()
        _print_table(("notebook_id", "applications", "distinct_rules"), nb_rows)
    return EXIT_OK


def _print_table(headers: tuple[str, ...], rows: list[tuple]) -> None:
    table = [headers] + [tuple(str(v) for v in row) for row in rows]
    widths = [max(len(row[i]) for row in table) for i in range(len(headers))]
    for row in table:
        print("  ".join(value.ljust(width) for value, width in zip(row, widths)).rstrip())


if __name__ == "__main__":
    sys.exit(main())
