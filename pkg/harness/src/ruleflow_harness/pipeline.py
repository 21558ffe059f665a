"""Discovery pipeline: SnippetGen and RuleGen orchestration.

SnippetGen proposes candidate rewrites per cell (CandidateGen), filters
them through equivalence and runtime checks, and lets an adversarial
FeedbackGen stage hunt for counterexamples. Accepted pairs go to RuleGen,
a chain of four agents (generalizer, kind resolver, rule constructor,
precondition synthesizer), each validated by deterministic checks plus an
LLM checker with at most three feedback iterations.

The engine is used only through its CLI: emitted rules must pass
`ruleflow check-rule` with exit 0. Rules are written with
`enabled = false`; flipping them on is a human review decision, not
something the pipeline automates.
"""

from __future__ import annotations

import ast
import enum
import json
import logging
import subprocess
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

from ruleflow_harness import prompts
from ruleflow_harness.equiv import equiv_check
from ruleflow_harness.frames import DataFrameSpec, generate_dataframes
from ruleflow_harness.llm import (
    LlmClient,
    LlmUnavailable,
    MalformedResponse,
    ResponseSchema,
)
from ruleflow_harness.optcheck import OptCheckConfig, opt_check
from ruleflow_harness.speedup import DEFAULT_CLI

logger = logging.getLogger(__name__)

RUNTIME_THRESHOLD_S = 1.0
MAX_SCALE_FACTOR = 2**14
MAX_CHECKER_ITERATIONS = 3

ALLOWED_KINDS = (
    "Name",
    "expr",
    "Const(str)",
    "Const(int)",
    "Const(float)",
    "List",
    "Slice",
    "Subscript",
)

SCHEMA_CANDIDATE = ResponseSchema("candidate_gen", ("reasoning", "rewritten_snippet"))
SCHEMA_FEEDBACK = ResponseSchema("feedback_gen", ("is_valid", "counterexamples"))
SCHEMA_A1 = ResponseSchema("generalizer", ("variables", "explanation"))
SCHEMA_A1_CHECKER = ResponseSchema("generalizer_checker", ("is_valid", "feedback"))
SCHEMA_A2 = ResponseSchema("type_resolver", ("ast_node_types", "explanation"))
SCHEMA_A2_CHECKER = ResponseSchema("type_resolver_checker", ("is_valid", "feedback"))
SCHEMA_A3 = ResponseSchema("rule_constructor", ("rewritten_lhs", "rewritten_rhs", "explanation"))
SCHEMA_A3_CHECKER = ResponseSchema("rule_constructor_checker", ("is_valid", "feedback"))
SCHEMA_A4 = ResponseSchema("precondition_synthesizer", ("runtime_preconditions", "explanation"))
SCHEMA_A4_CHECKER = ResponseSchema("precondition_checker", ("is_valid", "feedback"))


class PairStatus(enum.Enum):
    PROPOSED = "Proposed"
    EQUIV_FAILED = "EquivFailed"
    OPT_FAILED = "OptFailed"
    FEEDBACK_REJECTED = "FeedbackRejected"
    ACCEPTED = "Accepted"


@dataclass
class Cell:
    id: str
    source: str
    notebook_id: str
    baseline_runtime: float  # seconds


@dataclass
class CandidatePair:
    original: Cell
    candidate: str
    status: PairStatus = PairStatus.PROPOSED
    feedback_round: int = 0
    measured_ratio: float | None = None


@dataclass
class StageRejection:
    cell_id: str
    stage: str
    detail: str


@dataclass
class YieldReport:
    cells_in: int = 0
    cells_admitted: int = 0
    candidates: int = 0
    equiv_pass: int = 0
    opt_pass: int = 0
    accepted_pairs: int = 0
    rules_emitted: int = 0
    rejected_extraction: int = 0
    rejected_candidate_gen: int = 0
    rejected_equiv: int = 0
    rejected_opt: int = 0
    rejected_feedback: int = 0
    rejected_rule_gen: int = 0
    rejections: list[StageRejection] = field(default_factory=list)

    _FIELDS = (
        "cells_in",
        "cells_admitted",
        "candidates",
        "equiv_pass",
        "opt_pass",
        "accepted_pairs",
        "rules_emitted",
        "rejected_extraction",
        "rejected_candidate_gen",
        "rejected_equiv",
        "rejected_opt",
        "rejected_feedback",
        "rejected_rule_gen",
    )

    def to_tsv(self) -> str:
        lines = [f"{name}\t{getattr(self, name)}" for name in self._FIELDS]
        return "\n".join(lines) + "\n"


@dataclass
class PipelineConfig:
    frame_spec: DataFrameSpec
    m_frames: int = 5
    k: int = 5
    max_feedback_rounds: int = 1
    opt_cfg: OptCheckConfig = field(default_factory=OptCheckConfig)
    timer: Callable[[str], float] | None = None  # source -> median ms
    runtime_fn: Callable[[str], float] | None = None  # source -> seconds
    cli: tuple[str, ...] = DEFAULT_CLI


def _mentions_pandas(source: str) -> bool:
    try:
        tree = ast.parse(source)
    except SyntaxError:
        return False
    for node in ast.walk(tree):
        if isinstance(node, ast.Name) and node.id in ("pd", "pandas", "df"):
            return True
    return False


def extract_cells(notebooks: str | Path, runtime_fn: Callable[[str], float]) -> list[Cell]:
    """Code cells that touch pandas and run >= 1 s on fixture data.

    `runtime_fn` supplies the baseline runtime for a cell source (after
    any input scaling). Unreadable notebooks are skipped with a warning.
    """
    cells: list[Cell] = []
    root = Path(notebooks)
    paths = [root] if root.is_file() else sorted(root.glob("*.ipynb"), key=lambda p: p.name)
    for path in paths:
        try:
            document = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            logger.warning("skipping %s: %s", path.name, exc)
            continue
        for index, nb_cell in enumerate(document.get("cells", [])):
            if nb_cell.get("cell_type") != "code":
                continue
            source = "".join(nb_cell.get("source", []))
            if not source.strip() or not _mentions_pandas(source):
                continue
            runtime = runtime_fn(source)
            if runtime < RUNTIME_THRESHOLD_S:
                continue
            cells.append(Cell(f"{path.stem}-{index:02d}", source, path.stem, runtime))
    return cells


def scale_factor(runtime_at: Callable[[int], float], threshold: float = RUNTIME_THRESHOLD_S) -> int:
    """Smallest power-of-two row-replication factor reaching the runtime
    threshold, capped at 2^14."""
    factor = 1
    while runtime_at(factor) < threshold and factor < MAX_SCALE_FACTOR:
        factor *= 2
    return factor


def _structural_key(source: str) -> str | None:
    try:
        return ast.dump(ast.parse(source))
    except SyntaxError:
        return None


def candidate_gen(cell: Cell, llm: LlmClient, k: int = 5, feedback: str = "") -> list[str]:
    """Up to k structurally distinct candidate rewrites for one cell."""
    feedback_block = f"\nPrevious counterexamples to address:\n{feedback}\n" if feedback else ""
    prompt = prompts.render(prompts.CANDIDATE_GEN, before_code=cell.source, feedback=feedback_block)
    candidates: list[str] = []
    seen: set[str] = set()
    for _ in range(k):
        try:
            response = llm.send(prompt, SCHEMA_CANDIDATE)
        except LlmUnavailable:
            break
        except MalformedResponse as exc:
            logger.warning("cell %s: %s", cell.id, exc)
            continue
        snippet = response["rewritten_snippet"]
        if snippet is False or snippet == "False":
            continue
        key = _structural_key(str(snippet))
        if key is None:
            logger.warning("cell %s: candidate is not valid Python", cell.id)
            continue
        if key in seen:
            continue
        seen.add(key)
        candidates.append(str(snippet))
    return candidates


def feedback_gen(pair: CandidatePair, llm: LlmClient) -> tuple[bool, list[dict]]:
    """Adversarial pass over a validated pair; returns (is_valid, counterexamples)."""
    prompt = prompts.render(
        prompts.FEEDBACK_GEN, before_code=pair.original.source, after_code=pair.candidate
    )
    try:
        response = llm.send(prompt, SCHEMA_FEEDBACK)
    except MalformedResponse as exc:
        # Conservative: a validated pair is not discarded over a parse bug.
        logger.warning("feedback_gen response malformed, keeping pair: %s", exc)
        return True, []
    return bool(response["is_valid"]), list(response["counterexamples"])


def _check_rule_via_cli(rule_text: str, cli: tuple[str, ...]) -> tuple[int, str]:
    with tempfile.NamedTemporaryFile("w", suffix=".rule", delete=False) as fh:
        fh.write(rule_text)
        path = fh.name
    try:
        proc = subprocess.run([*cli, "check-rule", path], capture_output=True, text=True)
        return proc.returncode, (proc.stdout + proc.stderr).strip()
    finally:
        Path(path).unlink(missing_ok=True)


def _assemble_rule(
    rule_id: str,
    lhs: str,
    rhs: str,
    preconditions: list[str],
    avg_speedup: float,
    enabled: bool = False,
) -> str:
    lines = ["== LHS ==", lhs, "== RHS ==", rhs, "== PRE =="]
    lines.extend(preconditions)
    lines.append("== META ==")
    lines.append(f"id = {rule_id}")
    lines.append(f"avg_speedup = {avg_speedup:.2f}")
    lines.append(f"enabled = {'true' if enabled else 'false'}")
    return "\n".join(lines) + "\n"


class StageRejected(Exception):
    def __init__(self, stage: str, detail: str):
        super().__init__(f"{stage}: {detail}")
        self.stage = stage
        self.detail = detail


def _stage_loop(run_attempt: Callable[[str], tuple[bool, str, object]], stage: str) -> object:
    """Drive one agent with checker feedback, at most 3 iterations.

    `run_attempt(feedback)` returns (ok, new_feedback, value).
    """
    feedback = ""
    for _ in range(MAX_CHECKER_ITERATIONS):
        try:
            ok, feedback, value = run_attempt(feedback)
        except MalformedResponse as exc:
            logger.warning("%s: %s", stage, exc)
            feedback = str(exc)
            continue
        except LlmUnavailable as exc:
            raise StageRejected(stage, str(exc))
        if ok:
            return value
    raise StageRejected(stage, feedback or "iteration limit reached")


def generalize_pair(
    pair: CandidatePair,
    llm: LlmClient,
    cli: tuple[str, ...] = DEFAULT_CLI,
    rule_id: str | None = None,
) -> str:
    """Lift an accepted pair into a rule file via agents A1-A4.

    Returns the rule file text (already accepted by `check-rule`).
    Raises StageRejected naming the failing stage otherwise.
    """
    before, after = pair.original.source, pair.candidate
    rule_id = rule_id or f"rule-{pair.original.id}"

    def a1(feedback: str):
        prompt = prompts.render(
            prompts.GENERALIZER,
            before_code=before,
            after_code=after,
            feedback=f"\nFeedback from the checker:\n{feedback}\n" if feedback else "",
        )
        response = llm.send(prompt, SCHEMA_A1)
        variables = [str(v) for v in response["variables"]]
        # Deterministic check: entries must be literal substrings of the
        # original cell -- abstract placeholders are the known failure mode.
        bogus = [v for v in variables if v not in before]
        if bogus:
            return False, f"not literal substrings of the before code: {bogus}", None
        checker_prompt = prompts.render(
            prompts.GENERALIZER_CHECKER,
            before_code=before,
            after_code=after,
            variables=json.dumps(variables),
            explanation=str(response["explanation"]),
        )
        verdict = llm.send(checker_prompt, SCHEMA_A1_CHECKER)
        return bool(verdict["is_valid"]), str(verdict["feedback"]), variables

    variables = _stage_loop(a1, "A1-generalizer")

    def a2(feedback: str):
        prompt = prompts.render(
            prompts.TYPE_RESOLVER,
            before_code=before,
            after_code=after,
            variables=json.dumps(variables),
            feedback=f"\nFeedback from the checker:\n{feedback}\n" if feedback else "",
        )
        response = llm.send(prompt, SCHEMA_A2)
        kinds = [str(k) for k in response["ast_node_types"]]
        unknown = [k for k in kinds if k not in ALLOWED_KINDS]
        if unknown:
            return False, f"kinds not in the allowed set: {unknown}", None
        if len(kinds) != len(variables):
            return False, "one kind per variable, in order, is required", None
        checker_prompt = prompts.render(
            prompts.TYPE_RESOLVER_CHECKER,
            before_code=before,
            after_code=after,
            variables=json.dumps(variables),
            ast_node_types=json.dumps(kinds),
            explanation=str(response["explanation"]),
        )
        verdict = llm.send(checker_prompt, SCHEMA_A2_CHECKER)
        return bool(verdict["is_valid"]), str(verdict["feedback"]), kinds

    kinds = _stage_loop(a2, "A2-type-resolver")
    variables_text = "\n".join(f"{v} => {k}" for v, k in zip(variables, kinds))

    def a3(feedback: str):
        prompt = prompts.render(
            prompts.RULE_CONSTRUCTOR,
            before_code=before,
            after_code=after,
            variables_text=variables_text,
            feedback=f"\nFeedback from the checker:\n{feedback}\n" if feedback else "",
        )
        response = llm.send(prompt, SCHEMA_A3)
        lhs = str(response["rewritten_lhs"])
        rhs = str(response["rewritten_rhs"])
        provisional = _assemble_rule("provisional", lhs, rhs, [], 1.0)
        exit_code, output = _check_rule_via_cli(provisional, cli)
        if exit_code != 0:
            return False, f"check-rule rejected the rule: {output}", None
        checker_prompt = prompts.render(
            prompts.RULE_CONSTRUCTOR_CHECKER,
            before_code=before,
            after_code=after,
            variables_text=variables_text,
            rewritten_lhs=lhs,
            rewritten_rhs=rhs,
            explanation=str(response["explanation"]),
        )
        verdict = llm.send(checker_prompt, SCHEMA_A3_CHECKER)
        return bool(verdict["is_valid"]), str(verdict["feedback"]), (lhs, rhs)

    lhs, rhs = _stage_loop(a3, "A3-rule-constructor")

    avg = pair.measured_ratio if pair.measured_ratio is not None else 1.0

    def a4(feedback: str):
        prompt = prompts.render(
            prompts.PRECONDITION_SYNTHESIZER,
            before_code=before,
            after_code=after,
            rewritten_lhs=lhs,
            rewritten_rhs=rhs,
            feedback=f"\nFeedback from the checker:\n{feedback}\n" if feedback else "",
        )
        response = llm.send(prompt, SCHEMA_A4)
        preconditions = [str(p) for p in response["runtime_preconditions"]]
        rule_text = _assemble_rule(rule_id, lhs, rhs, preconditions, avg)
        exit_code, output = _check_rule_via_cli(rule_text, cli)
        if exit_code != 0:
            return False, f"check-rule rejected the rule: {output}", None
        checker_prompt = prompts.render(
            prompts.PRECONDITION_CHECKER,
            before_code=before,
            after_code=after,
            variables_text=variables_text,
            rewritten_lhs=lhs,
            rewritten_rhs=rhs,
            runtime_preconditions=json.dumps(preconditions),
            explanation=str(response["explanation"]),
        )
        verdict = llm.send(checker_prompt, SCHEMA_A4_CHECKER)
        return bool(verdict["is_valid"]), str(verdict["feedback"]), rule_text

    return _stage_loop(a4, "A4-precondition-synthesizer")


def _client_for(llm, cell: Cell) -> LlmClient:
    if hasattr(llm, "client_for"):
        return llm.client_for(cell.id)
    return llm


def run_pipeline(
    notebooks: str | Path,
    llm,
    out_dir: str | Path,
    cfg: PipelineConfig,
) -> YieldReport:
    """Drive the full discovery loop and write rules plus a yield report.

    `llm` is either a single client or a router with
    `client_for(cell_id)` (the mock transcripts use the router form).
    Per-item failures are logged and the pipeline continues.
    """
    out_path = Path(out_dir)
    out_path.mkdir(parents=True, exist_ok=True)
    report = YieldReport()
    frames = generate_dataframes(cfg.frame_spec, cfg.m_frames)

    runtime_fn = cfg.runtime_fn or (lambda source: RUNTIME_THRESHOLD_S)
    all_cells = _count_code_cells(notebooks)
    cells = extract_cells(notebooks, runtime_fn)
    report.cells_in = all_cells
    report.cells_admitted = len(cells)
    report.rejected_extraction = all_cells - len(cells)

    accepted: list[tuple[CandidatePair, object]] = []
    for cell in cells:
        client = _client_for(llm, cell)
        survivors = _snippet_gen(cell, client, frames, cfg, report)
        for pair in survivors:
            accepted.append((pair, client))
    report.accepted_pairs = len(accepted)

    for pair, client in accepted:
        try:
            rule_text = generalize_pair(pair, client, cli=cfg.cli)
        except StageRejected as exc:
            report.rejected_rule_gen += 1
            report.rejections.append(StageRejection(pair.original.id, exc.stage, exc.detail))
            continue
        rule_id = f"rule-{pair.original.id}"
        (out_path / f"{rule_id}.rule").write_text(rule_text, encoding="utf-8")
        report.rules_emitted += 1

    (out_path / "report.tsv").write_text(report.to_tsv(), encoding="utf-8")
    return report


def _count_code_cells(notebooks: str | Path) -> int:
    root = Path(notebooks)
    paths = [root] if root.is_file() else sorted(root.glob("*.ipynb"), key=lambda p: p.name)
    total = 0
    for path in paths:
        try:
            document = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError):
            continue
        total += sum(1 for c in document.get("cells", []) if c.get("cell_type") == "code")
    return total


def _snippet_gen(
    cell: Cell,
    client: LlmClient,
    frames,
    cfg: PipelineConfig,
    report: YieldReport,
) -> list[CandidatePair]:
    """CandidateGen -> EquivCheck -> OptCheck -> FeedbackGen for one cell."""
    accepted: list[CandidatePair] = []
    feedback_text = ""
    round_index = 0
    while True:
        candidates = candidate_gen(cell, client, k=cfg.k, feedback=feedback_text)
        report.candidates += len(candidates)
        if round_index == 0 and not candidates:
            report.rejected_candidate_gen += 1
            report.rejections.append(StageRejection(cell.id, "candidate_gen", "no candidates"))
            return []

        had_counterexamples = False
        for candidate in candidates:
            pair = CandidatePair(cell, candidate, feedback_round=round_index)
            verdict = equiv_check(cell.source, candidate, frames)
            if not verdict:
                pair.status = PairStatus.EQUIV_FAILED
                report.rejected_equiv += 1
                report.rejections.append(
                    StageRejection(cell.id, "equiv_check", verdict.divergences[0].detail)
                )
                continue
            report.equiv_pass += 1
            opt = opt_check(cell.source, candidate, frames, cfg.opt_cfg, timer=cfg.timer)
            if not opt:
                pair.status = PairStatus.OPT_FAILED
                report.rejected_opt += 1
                report.rejections.append(
                    StageRejection(cell.id, "opt_check", f"delta={opt.delta_ms:.1f} rel={opt.rel:.2f}")
                )
                continue
            report.opt_pass += 1
            pair.measured_ratio = opt.ratio
            is_valid, counterexamples = feedback_gen(pair, client)
            if is_valid:
                pair.status = PairStatus.ACCEPTED
                accepted.append(pair)
            else:
                # The pair as proposed is rejected; the counterexamples may
                # still steer a repaired candidate in the next round.
                pair.status = PairStatus.FEEDBACK_REJECTED
                report.rejected_feedback += 1
                report.rejections.append(
                    StageRejection(cell.id, "feedback_gen", "counterexamples found")
                )
                had_counterexamples = True
                feedback_text = "\n".join(
                    str(c.get("description", c)) if isinstance(c, dict) else str(c)
                    for c in counterexamples
                )

        if not had_counterexamples or round_index >= cfg.max_feedback_rounds:
            return accepted
        round_index += 1
