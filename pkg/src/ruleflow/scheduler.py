"""Greedy selection among conflicting matches.

Matches are ranked by the owning rule's expected speedup (highest first);
ties break on rule id, then window position. Accepted windows never
overlap, including the case where one match sits inside a statement block
covered by another match's window.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ruleflow.matcher import Match
from ruleflow.rule_dsl import RuleError

REASON_OVERLAP = "Overlap"
REASON_DISABLED = "Disabled"


class UnknownRule(RuleError):
    code = "UNKNOWN_RULE"


@dataclass
class ApplicationPlan:
    selected: list[Match] = field(default_factory=list)
    rejected: list[tuple[Match, str]] = field(default_factory=list)


def _conflicts(a: Match, b: Match) -> bool:
    if a.path == b.path:
        return a.start < b.stop and b.start < a.stop
    # Nested contexts: a match inside a block that lies within the other
    # match's window would be rewritten away by it.
    for outer, inner in ((a, b), (b, a)):
        prefix = outer.path
        if len(inner.path) > len(prefix) and inner.path[: len(prefix)] == prefix:
            stmt_index = inner.path[len(prefix)][0]
            if outer.start <= stmt_index < outer.stop:
                return True
    return False


def schedule(matches: list[Match], corpus) -> ApplicationPlan:
    """Sort by (avg_speedup desc, rule id asc, window start asc), then
    greedily accept non-conflicting matches. Disabled rules are rejected.

    Raises UnknownRule if a match references a rule absent from the corpus.
    """
    for m in matches:
        if m.rule_id not in corpus.by_id:
            raise UnknownRule(f"match references unknown rule {m.rule_id!r}")

    def key(m: Match):
        return (-corpus.by_id[m.rule_id].meta.avg_speedup, m.rule_id, m.path, m.start, m.stop)

    plan = ApplicationPlan()
    for m in sorted(matches, key=key):
        if not corpus.by_id[m.rule_id].meta.enabled:
            plan.rejected.append((m, REASON_DISABLED))
            continue
        if any(_conflicts(m, chosen) for chosen in plan.selected):
            plan.rejected.append((m, REASON_OVERLAP))
            continue
        plan.selected.append(m)
    return plan
