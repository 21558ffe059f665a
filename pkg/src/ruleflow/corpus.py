"""Rule corpus loading and hit accounting.

A corpus is a directory of ``*.rule`` files, loaded in lexicographic
filename order. Files that fail to parse or validate are skipped with a
warning so one bad rule never takes down the rest. Hits are appended to a
tab-separated log, one event per line:

    rule_id <TAB> notebook_id <TAB> cell_index <TAB> ISO-8601 timestamp
"""

from __future__ import annotations

import datetime
import logging
from dataclasses import dataclass, field
from pathlib import Path

from ruleflow.rule_dsl import RewriteRule, RuleError, parse_rule_file, validate_rule

logger = logging.getLogger(__name__)


class DuplicateRuleId(RuleError):
    code = "DUPLICATE_RULE_ID"


class UnknownRule(RuleError):
    code = "UNKNOWN_RULE"


class MalformedLogLine(RuleError):
    code = "MALFORMED_LOG_LINE"


@dataclass
class RuleCorpus:
    rules: list[RewriteRule]
    source_dir: Path | None = None

    def __post_init__(self) -> None:
        self.by_id = {rule.id: rule for rule in self.rules}

    def __len__(self) -> int:
        return len(self.rules)


def load_corpus(dir: str | Path) -> RuleCorpus:
    """Load every valid `*.rule` file; skip invalid ones with a warning.

    Raises DuplicateRuleId on colliding rule ids and OSError on an
    unreadable directory.
    """
    source = Path(dir)
    rules: list[RewriteRule] = []
    seen: dict[str, Path] = {}
    for path in sorted(source.glob("*.rule"), key=lambda p: p.name):
        try:
            rule = parse_rule_file(path.read_text(encoding="utf-8"))
        except RuleError as exc:
            logger.warning("skipping %s: %s %s", path.name, exc.code, exc.message)
            continue
        diagnostics = validate_rule(rule)
        if diagnostics:
            for diag in diagnostics:
                logger.warning("skipping %s: %s [%s] %s", path.name, diag.code, diag.section, diag.message)
            continue
        if rule.id in seen:
            raise DuplicateRuleId(
                f"rule id {rule.id!r} defined in both {seen[rule.id].name} and {path.name}"
            )
        seen[rule.id] = path
        rules.append(rule)
    return RuleCorpus(rules, source)


@dataclass(frozen=True)
class HitEvent:
    rule_id: str
    notebook_id: str
    cell_index: int
    timestamp: str


@dataclass
class HitLog:
    """Append-only hit record; optionally backed by a file."""

    path: Path | None = None
    known_rule_ids: frozenset[str] | None = None
    events: list[HitEvent] = field(default_factory=list)

    def append(self, event: HitEvent) -> None:
        if self.known_rule_ids is not None and event.rule_id not in self.known_rule_ids:
            raise UnknownRule(f"hit for unknown rule {event.rule_id!r}")
        self.events.append(event)
        if self.path is not None:
            line = f"{event.rule_id}\t{event.notebook_id}\t{event.cell_index}\t{event.timestamp}\n"
            with self.path.open("a", encoding="utf-8") as fh:
                fh.write(line)


def record_hit(log: HitLog, rule_id: str, notebook_id: str, cell_index: int) -> None:
    """Append one hit event; each application is counted separately."""
    timestamp = datetime.datetime.now(datetime.timezone.utc).isoformat()
    log.append(HitEvent(rule_id, notebook_id, cell_index, timestamp))


def parse_hit_log(path: str | Path) -> HitLog:
    """Load a persisted hit log; raises MalformedLogLine with the line number."""
    log = HitLog()
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 4:
            raise MalformedLogLine(f"line {lineno}: expected 4 tab-separated fields")
        rule_id, notebook_id, cell_index, timestamp = parts
        try:
            index = int(cell_index)
        except ValueError:
            raise MalformedLogLine(f"line {lineno}: bad cell index {cell_index!r}") from None
        log.events.append(HitEvent(rule_id, notebook_id, index, timestamp))
    return log


@dataclass
class HitReport:
    rule_applications: dict[str, int]
    rule_notebooks: dict[str, int]  # distinct notebooks per rule
    notebook_applications: dict[str, int]
    notebook_rules: dict[str, int]  # distinct rules per notebook

    @property
    def total(self) -> int:
        return sum(self.rule_applications.values())


def report(log: HitLog) -> HitReport:
    """Rule-wise and notebook-wise aggregates over the hit log."""
    rule_apps: dict[str, int] = {}
    rule_nb: dict[str, set[str]] = {}
    nb_apps: dict[str, int] = {}
    nb_rules: dict[str, set[str]] = {}
    for event in log.events:
        rule_apps[event.rule_id] = rule_apps.get(event.rule_id, 0) + 1
        rule_nb.setdefault(event.rule_id, set()).add(event.notebook_id)
        nb_apps[event.notebook_id] = nb_apps.get(event.notebook_id, 0) + 1
        nb_rules.setdefault(event.notebook_id, set()).add(event.rule_id)
    return HitReport(
        rule_applications=rule_apps,
        rule_notebooks={k: len(v) for k, v in rule_nb.items()},
        notebook_applications=nb_apps,
        notebook_rules={k: len(v) for k, v in nb_rules.items()},
    )
