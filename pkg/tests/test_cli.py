import json

import pytest

from ruleflow.cli import EXIT_IO, EXIT_OK, EXIT_VALIDATION, main
from ruleflow.subject_ast import parse_source, structurally_equal


def notebook(cells):
    return {
        "cells": cells,
        "metadata": {},
        "nbformat": 4,
        "nbformat_minor": 5,
    }


def code_cell(source: str):
    return {
        "cell_type": "code",
        "execution_count": None,
        "metadata": {},
        "outputs": [],
        "source": source.splitlines(keepends=True),
    }


def markdown_cell(text: str):
    return {"cell_type": "markdown", "metadata": {}, "source": [text]}


class TestRewriteScript:
    def test_basic_rewrite(self, tmp_path, rules_dir, capsys):
        src = tmp_path / "in.py"
        out = tmp_path / "out.py"
        src.write_text("df = df.drop(['Date'], axis=1)\n")
        code = main(["rewrite", "--rules", str(rules_dir), str(src), "-o", str(out)])
        assert code == EXIT_OK
        stdout = capsys.readouterr().out
        assert "cell 0: 1 application(s)" in stdout
        assert "total applications: 1" in stdout
        assert "df.pop('Date')" in out.read_text()

    def test_no_match_output_equals_input(self, tmp_path, rules_dir, capsys):
        src = tmp_path / "in.py"
        out = tmp_path / "out.py"
        src.write_text("value = compute()\nprint(value)\n")
        assert main(["rewrite", "--rules", str(rules_dir), str(src), "-o", str(out)]) == EXIT_OK
        assert structurally_equal(parse_source(out.read_text()), parse_source(src.read_text()))
        assert "total applications: 0" in capsys.readouterr().out

    def test_unparsable_input_is_io_error(self, tmp_path, rules_dir, capsys):
        src = tmp_path / "in.py"
        src.write_text("def broken(:\n")
        code = main(["rewrite", "--rules", str(rules_dir), str(src), "-o", str(tmp_path / "out.py")])
        assert code == EXIT_IO
        assert "error" in capsys.readouterr().err

    def test_missing_input_is_io_error(self, tmp_path, rules_dir, capsys):
        code = main(
            ["rewrite", "--rules", str(rules_dir), str(tmp_path / "nope.py"), "-o", str(tmp_path / "o.py")]
        )
        assert code == EXIT_IO

    def test_missing_rules_dir_flag(self, tmp_path, monkeypatch, capsys):
        monkeypatch.delenv("RULEFLOW_RULES", raising=False)
        src = tmp_path / "in.py"
        src.write_text("x = 1\n")
        assert main(["rewrite", str(src), "-o", str(tmp_path / "o.py")]) == EXIT_IO

    def test_rules_dir_from_environment(self, tmp_path, rules_dir, monkeypatch, capsys):
        monkeypatch.setenv("RULEFLOW_RULES", str(rules_dir))
        src = tmp_path / "in.py"
        out = tmp_path / "out.py"
        src.write_text("df = df.drop(['Date'], axis=1)\n")
        assert main(["rewrite", str(src), "-o", str(out)]) == EXIT_OK
        assert "df.pop('Date')" in out.read_text()

    def test_duplicate_rule_ids_fail_load(self, tmp_path, rules_dir, capsys):
        dup_dir = tmp_path / "rules"
        dup_dir.mkdir()
        text = (rules_dir / "drop_to_pop.rule").read_text()
        (dup_dir / "a.rule").write_text(text)
        (dup_dir / "b.rule").write_text(text)
        src = tmp_path / "in.py"
        src.write_text("x = 1\n")
        assert main(["rewrite", "--rules", str(dup_dir), str(src), "-o", str(tmp_path / "o.py")]) == EXIT_IO


class TestRewriteNotebook:
    def test_mixed_cells(self, tmp_path, rules_dir, capsys):
        nb = notebook(
            [
                markdown_cell("# intro"),
                code_cell("x = 1\n"),
                code_cell("df = df.drop(['Date'], axis=1)\n"),
                code_cell("   \n"),
            ]
        )
        src = tmp_path / "nb.ipynb"
        out = tmp_path / "out.ipynb"
        src.write_text(json.dumps(nb))
        assert main(["rewrite", "--rules", str(rules_dir), str(src), "-o", str(out)]) == EXIT_OK
        stdout = capsys.readouterr().out
        assert "cell 1: 0 application(s)" in stdout
        assert "cell 2: 1 application(s)" in stdout
        assert "cell 3: 0 application(s)" in stdout
        assert "total applications: 1" in stdout

        result = json.loads(out.read_text())
        assert result["cells"][0]["source"] == ["# intro"]
        assert structurally_equal(
            parse_source("".join(result["cells"][1]["source"])), parse_source("x = 1")
        )
        rewritten = "".join(result["cells"][2]["source"])
        assert "df.pop('Date')" in rewritten
        # Whitespace-only code cells pass through untouched.
        assert result["cells"][3]["source"] == ["   \n"]

    def test_hit_log_written(self, tmp_path, rules_dir):
        nb = notebook([code_cell("df = df.drop(['Date'], axis=1)\n")])
        src = tmp_path / "nb.ipynb"
        src.write_text(json.dumps(nb))
        log = tmp_path / "hits.tsv"
        assert (
            main(
                [
                    "rewrite",
                    "--rules",
                    str(rules_dir),
                    "--hit-log",
                    str(log),
                    "--notebook-id",
                    "demo-nb",
                    str(src),
                    "-o",
                    str(tmp_path / "out.ipynb"),
                ]
            )
            == EXIT_OK
        )
        lines = log.read_text().splitlines()
        assert len(lines) == 1
        fields = lines[0].split("\t")
        assert fields[:3] == ["drop-to-pop", "demo-nb", "0"]

    def test_notebook_id_defaults_to_stem(self, tmp_path, rules_dir):
        nb = notebook([code_cell("df = df.drop(['Date'], axis=1)\n")])
        src = tmp_path / "analysis.ipynb"
        src.write_text(json.dumps(nb))
        log = tmp_path / "hits.tsv"
        main(
            [
                "rewrite",
                "--rules",
                str(rules_dir),
                "--hit-log",
                str(log),
                str(src),
                "-o",
                str(tmp_path / "out.ipynb"),
            ]
        )
        assert log.read_text().split("\t")[1] == "analysis"


class TestCheckRule:
    def test_valid_rule(self, rules_dir, capsys):
        assert main(["check-rule", str(rules_dir / "drop_to_pop.rule")]) == EXIT_OK
        assert capsys.readouterr().out == "OK drop-to-pop\n"

    @pytest.mark.parametrize(
        ("name", "code"),
        [
            ("hallucinated_kind.rule", "UNKNOWN_KIND"),
            ("unbound_rhs.rule", "UNBOUND_VARIABLE"),
            ("attribute_hole.rule", "ILLEGAL_HOLE_POSITION"),
            ("lhs_equals_rhs.rule", "LHS_EQUALS_RHS"),
            ("precondition_statement.rule", "PRECONDITION_NOT_EXPRESSION"),
        ],
    )
    def test_invalid_rules(self, invalid_rules_dir, capsys, name, code):
        assert main(["check-rule", str(invalid_rules_dir / name)]) == EXIT_VALIDATION
        first = capsys.readouterr().out.splitlines()[0]
        fields = first.split("\t")
        assert len(fields) == 3
        assert fields[0] == code

    def test_missing_file(self, tmp_path, capsys):
        assert main(["check-rule", str(tmp_path / "nope.rule")]) == EXIT_IO


class TestReport:
    LOG = (
        "drop-to-pop\tnb-01\t0\t2026-01-05T00:00:00+00:00\n"
        "drop-to-pop\tnb-02\t1\t2026-01-05T00:00:01+00:00\n"
        "rename-inplace\tnb-01\t2\t2026-01-05T00:00:02+00:00\n"
    )

    def test_tsv_format(self, tmp_path, capsys):
        log = tmp_path / "hits.tsv"
        log.write_text(self.LOG)
        assert main(["report", "--format=tsv", str(log)]) == EXIT_OK
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "rule_id\tapplications\tdistinct_notebooks"
        assert "drop-to-pop\t2\t2" in lines
        assert "rename-inplace\t1\t1" in lines
        assert "notebook_id\tapplications\tdistinct_rules" in lines
        assert "nb-01\t2\t2" in lines

    def test_pretty_format_aligned(self, tmp_path, capsys):
        log = tmp_path / "hits.tsv"
        log.write_text(self.LOG)
        assert main(["report", str(log)]) == EXIT_OK
        out = capsys.readouterr().out
        assert "rule_id" in out and "drop-to-pop" in out
        assert "\t" not in out

    def test_malformed_log(self, tmp_path, capsys):
        log = tmp_path / "hits.tsv"
        log.write_text("garbage\n")
        assert main(["report", str(log)]) == EXIT_IO

    def test_missing_log(self, tmp_path):
        assert main(["report", str(tmp_path / "nope.tsv")]) == EXIT_IO
