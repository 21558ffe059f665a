import random

import pytest

from ruleflow.corpus import RuleCorpus
from ruleflow.matcher import Match, Substitution, find_matches
from ruleflow.rule_dsl import parse_rule_file
from ruleflow.scheduler import (
    REASON_DISABLED,
    REASON_OVERLAP,
    UnknownRule,
    schedule,
)
from ruleflow.subject_ast import parse_source

RULE_TEMPLATE = """== LHS ==
@{{Name: v1}} = @{{Name: v1}}.head()
== RHS ==
@{{v1}} = @{{v1}}
== PRE ==
== META ==
id = {id}
avg_speedup = {avg}
enabled = {enabled}
"""


def make_rule(rule_id: str, avg: float, enabled: bool = True):
    return parse_rule_file(
        RULE_TEMPLATE.format(id=rule_id, avg=avg, enabled="true" if enabled else "false")
    )


def make_corpus(*rules) -> RuleCorpus:
    return RuleCorpus(rules=list(rules))


def m(rule_id: str, start: int, stop: int, path=()):
    return Match(rule_id, tuple(path), start, stop, Substitution())


def test_higher_speedup_wins_overlap():
    corpus = make_corpus(make_rule("rename-inplace", 22.57), make_rule("bracket-to-loc", 1.32))
    plan = schedule([m("bracket-to-loc", 0, 2), m("rename-inplace", 1, 3)], corpus)
    assert [x.rule_id for x in plan.selected] == ["rename-inplace"]
    assert plan.rejected == [(plan.rejected[0][0], REASON_OVERLAP)]
    assert plan.rejected[0][0].rule_id == "bracket-to-loc"


def test_equal_speedup_ties_break_on_rule_id():
    corpus = make_corpus(make_rule("aaa", 2.0), make_rule("zzz", 2.0))
    plan = schedule([m("zzz", 0, 1), m("aaa", 0, 1)], corpus)
    assert [x.rule_id for x in plan.selected] == ["aaa"]
    assert plan.rejected[0][0].rule_id == "zzz"


def test_same_rule_ties_break_on_position():
    corpus = make_corpus(make_rule("r", 2.0))
    plan = schedule([m("r", 3, 4), m("r", 0, 1)], corpus)
    assert [(x.start, x.stop) for x in plan.selected] == [(0, 1), (3, 4)]


def test_non_overlapping_all_selected():
    corpus = make_corpus(make_rule("a", 3.0), make_rule("b", 2.0))
    plan = schedule([m("a", 0, 1), m("b", 2, 3), m("b", 5, 6)], corpus)
    assert len(plan.selected) == 3
    assert plan.rejected == []


def test_adjacent_windows_do_not_conflict():
    corpus = make_corpus(make_rule("a", 3.0))
    plan = schedule([m("a", 0, 2), m("a", 2, 4)], corpus)
    assert len(plan.selected) == 2


def test_different_contexts_do_not_conflict():
    corpus = make_corpus(make_rule("a", 3.0))
    plan = schedule([m("a", 0, 1, path=((0, "body"),)), m("a", 0, 1, path=((0, "orelse"),))], corpus)
    assert len(plan.selected) == 2


def test_nested_context_conflicts_with_covering_window():
    corpus = make_corpus(make_rule("outer", 5.0), make_rule("inner", 1.5))
    # The inner match lives in the body of statement 1, which the outer
    # window [0, 2) covers and would rewrite away.
    plan = schedule(
        [m("outer", 0, 2), m("inner", 0, 1, path=((1, "body"),))],
        corpus,
    )
    assert [x.rule_id for x in plan.selected] == ["outer"]
    assert plan.rejected[0][1] == REASON_OVERLAP


def test_nested_context_outside_window_is_fine():
    corpus = make_corpus(make_rule("outer", 5.0), make_rule("inner", 1.5))
    plan = schedule(
        [m("outer", 0, 2), m("inner", 0, 1, path=((4, "body"),))],
        corpus,
    )
    assert len(plan.selected) == 2


def test_disabled_rule_rejected():
    corpus = make_corpus(make_rule("off", 9.0, enabled=False), make_rule("on", 1.5))
    plan = schedule([m("off", 0, 1), m("on", 0, 1)], corpus)
    assert [x.rule_id for x in plan.selected] == ["on"]
    assert plan.rejected == [(plan.rejected[0][0], REASON_DISABLED)]


def test_unknown_rule_raises():
    corpus = make_corpus(make_rule("known", 1.0))
    with pytest.raises(UnknownRule):
        schedule([m("ghost", 0, 1)], corpus)


def test_empty_matches():
    plan = schedule([], make_corpus())
    assert plan.selected == [] and plan.rejected == []


def _random_conflict_set(rng: random.Random, corpus: RuleCorpus):
    matches = []
    for _ in range(rng.randrange(2, 12)):
        rule = rng.choice(corpus.rules)
        start = rng.randrange(0, 10)
        stop = start + rng.randrange(1, 3)
        path = () if rng.random() < 0.7 else ((rng.randrange(0, 10), rng.choice(["body", "orelse"])),)
        matches.append(m(rule.id, start, stop, path=path))
    return matches


def test_randomized_selected_windows_are_disjoint():
    rng = random.Random(41)
    corpus = make_corpus(*(make_rule(f"r{i}", 1.0 + i * 0.5) for i in range(5)))
    for _ in range(200):
        matches = _random_conflict_set(rng, corpus)
        plan = schedule(matches, corpus)
        assert len(plan.selected) + len(plan.rejected) == len(matches)
        chosen = plan.selected
        for i in range(len(chosen)):
            for j in range(i + 1, len(chosen)):
                a, b = chosen[i], chosen[j]
                if a.path == b.path:
                    assert a.stop <= b.start or b.stop <= a.start, (a, b)


def test_randomized_schedule_is_deterministic():
    corpus = make_corpus(*(make_rule(f"r{i}", 1.0 + i * 0.5) for i in range(5)))
    matches = _random_conflict_set(random.Random(43), corpus)
    baseline = None
    for _ in range(10):
        shuffled = list(matches)
        random.Random(44).shuffle(shuffled)
        plan = schedule(shuffled, corpus)
        key = [(x.rule_id, x.path, x.start, x.stop) for x in plan.selected]
        if baseline is None:
            baseline = key
        assert key == baseline


def test_schedule_from_real_matches(corpus):
    cell = parse_source("df = df.drop(['Date'], axis=1)\ndf = df.drop(['Date'], axis=1)")
    matches = find_matches(cell, corpus.rules)
    plan = schedule(matches, corpus)
    drops = [x for x in plan.selected if x.rule_id == "drop-to-pop"]
    assert [(x.start, x.stop) for x in drops] == [(0, 1), (1, 2)]
