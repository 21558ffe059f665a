import logging

import pytest

from ruleflow.corpus import (
    DuplicateRuleId,
    HitEvent,
    HitLog,
    MalformedLogLine,
    UnknownRule,
    load_corpus,
    parse_hit_log,
    record_hit,
    report,
)

SIMPLE_RULE = """== LHS ==
@{{Name: v1}} = @{{Name: v1}}.head()
== RHS ==
@{{v1}} = @{{v1}}
== PRE ==
== META ==
id = {id}
"""


class TestLoadCorpus:
    def test_fixture_directory(self, corpus):
        assert len(corpus) == 10
        assert "drop-to-pop" in corpus.by_id
        rule = corpus.by_id["drop-to-pop"]
        assert rule.meta.avg_speedup == 18.31
        assert rule.meta.max_speedup == 130.22

    def test_lexicographic_order(self, corpus, rules_dir):
        expected = []
        for path in sorted(rules_dir.glob("*.rule"), key=lambda p: p.name):
            for line in path.read_text().splitlines():
                if line.startswith("id ="):
                    expected.append(line.partition("=")[2].strip())
        assert [r.id for r in corpus.rules] == expected

    def test_empty_directory(self, tmp_path):
        corpus = load_corpus(tmp_path)
        assert len(corpus) == 0
        assert corpus.source_dir == tmp_path

    def test_invalid_rules_skipped_with_warning(self, tmp_path, rules_dir, invalid_rules_dir, caplog):
        (tmp_path / "a_good.rule").write_text((rules_dir / "drop_to_pop.rule").read_text())
        (tmp_path / "b_bad.rule").write_text((invalid_rules_dir / "hallucinated_kind.rule").read_text())
        with caplog.at_level(logging.WARNING, logger="ruleflow.corpus"):
            corpus = load_corpus(tmp_path)
        assert [r.id for r in corpus.rules] == ["drop-to-pop"]
        assert any("b_bad.rule" in rec.getMessage() for rec in caplog.records)

    def test_validation_failures_also_skipped(self, tmp_path, invalid_rules_dir, caplog):
        (tmp_path / "x.rule").write_text((invalid_rules_dir / "lhs_equals_rhs.rule").read_text())
        with caplog.at_level(logging.WARNING, logger="ruleflow.corpus"):
            corpus = load_corpus(tmp_path)
        assert len(corpus) == 0
        assert caplog.records

    def test_duplicate_id_raises(self, tmp_path):
        (tmp_path / "a.rule").write_text(SIMPLE_RULE.format(id="dup"))
        (tmp_path / "b.rule").write_text(SIMPLE_RULE.format(id="dup"))
        with pytest.raises(DuplicateRuleId):
            load_corpus(tmp_path)

    def test_non_rule_files_ignored(self, tmp_path):
        (tmp_path / "notes.txt").write_text("not a rule")
        (tmp_path / "a.rule").write_text(SIMPLE_RULE.format(id="only"))
        assert [r.id for r in load_corpus(tmp_path).rules] == ["only"]


class TestHitLog:
    def test_record_hit_appends_tsv_line(self, tmp_path):
        path = tmp_path / "hits.tsv"
        log = HitLog(path=path, known_rule_ids=frozenset({"drop-to-pop"}))
        record_hit(log, "drop-to-pop", "nb-01", 3)
        record_hit(log, "drop-to-pop", "nb-02", 0)
        lines = path.read_text().splitlines()
        assert len(lines) == 2
        fields = lines[0].split("\t")
        assert fields[:3] == ["drop-to-pop", "nb-01", "3"]
        # ISO-8601 timestamp, UTC.
        assert "T" in fields[3] and fields[3].endswith("+00:00")

    def test_append_only(self, tmp_path):
        path = tmp_path / "hits.tsv"
        log = HitLog(path=path)
        record_hit(log, "r", "nb", 0)
        log2 = HitLog(path=path)
        record_hit(log2, "r", "nb", 1)
        assert len(path.read_text().splitlines()) == 2

    def test_unknown_rule_rejected(self):
        log = HitLog(known_rule_ids=frozenset({"known"}))
        with pytest.raises(UnknownRule):
            record_hit(log, "ghost", "nb", 0)
        assert log.events == []

    def test_roundtrip_through_file(self, tmp_path):
        path = tmp_path / "hits.tsv"
        log = HitLog(path=path)
        record_hit(log, "r1", "nb-01", 2)
        record_hit(log, "r2", "nb-01", 5)
        loaded = parse_hit_log(path)
        assert [(e.rule_id, e.notebook_id, e.cell_index) for e in loaded.events] == [
            ("r1", "nb-01", 2),
            ("r2", "nb-01", 5),
        ]

    def test_malformed_line_reports_lineno(self, tmp_path):
        path = tmp_path / "hits.tsv"
        path.write_text("r1\tnb\t0\t2026-01-01T00:00:00+00:00\nbroken line\n")
        with pytest.raises(MalformedLogLine) as exc:
            parse_hit_log(path)
        assert "line 2" in exc.value.message

    def test_bad_cell_index(self, tmp_path):
        path = tmp_path / "hits.tsv"
        path.write_text("r1\tnb\tthree\t2026-01-01T00:00:00+00:00\n")
        with pytest.raises(MalformedLogLine):
            parse_hit_log(path)


def _synthetic_log() -> HitLog:
    events = [
        ("drop-to-pop", "nb-01", 0),
        ("drop-to-pop", "nb-01", 4),
        ("drop-to-pop", "nb-02", 1),
        ("rename-inplace", "nb-01", 2),
        ("rename-inplace", "nb-03", 0),
        ("bracket-to-loc", "nb-02", 3),
    ]
    log = HitLog()
    for rule_id, nb, idx in events:
        log.events.append(HitEvent(rule_id, nb, idx, "2026-01-05T00:00:00+00:00"))
    return log


class TestReport:
    def test_matches_groupby_oracle(self):
        log = _synthetic_log()
        rep = report(log)

        # Independent oracle: plain dict-of-counters over the event list.
        by_rule: dict[str, int] = {}
        rule_nbs: dict[str, set] = {}
        by_nb: dict[str, int] = {}
        nb_rules: dict[str, set] = {}
        for e in log.events:
            by_rule[e.rule_id] = by_rule.get(e.rule_id, 0) + 1
            rule_nbs.setdefault(e.rule_id, set()).add(e.notebook_id)
            by_nb[e.notebook_id] = by_nb.get(e.notebook_id, 0) + 1
            nb_rules.setdefault(e.notebook_id, set()).add(e.rule_id)

        assert rep.rule_applications == by_rule
        assert rep.rule_notebooks == {k: len(v) for k, v in rule_nbs.items()}
        assert rep.notebook_applications == by_nb
        assert rep.notebook_rules == {k: len(v) for k, v in nb_rules.items()}

    def test_totals_invariant(self):
        rep = report(_synthetic_log())
        assert rep.total == 6
        assert sum(rep.notebook_applications.values()) == rep.total

    def test_empty_log(self):
        rep = report(HitLog())
        assert rep.total == 0
        assert rep.rule_applications == {}
