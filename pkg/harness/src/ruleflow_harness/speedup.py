"""Per-rule speedup measurement through the engine CLI.

The rewrite itself is performed by the `ruleflow` command-line interface
(subprocess, frozen exit codes), so measurements always include the
emitted runtime guards: a rule whose precondition fails at runtime is
charged for the guard evaluation and shows up as a ratio below 1.
"""

from __future__ import annotations

import subprocess
import sys
import tempfile
from dataclasses import dataclass
from pathlib import Path

import pandas as pd

from ruleflow_harness.execution import HarnessError
from ruleflow_harness.optcheck import OptCheckConfig, time_cell

DEFAULT_CLI = (sys.executable, "-m", "ruleflow")


class NoHit(RuntimeError):
    """The rule did not match a fixture cell."""


@dataclass
class SpeedupSample:
    cell: str
    rewritten: str
    t_orig_ms: float
    t_rewritten_ms: float

    @property
    def ratio(self) -> float:
        return self.t_orig_ms / self.t_rewritten_ms


def rewrite_via_cli(
    cell_source: str, rule_text: str, cli: tuple[str, ...] = DEFAULT_CLI
) -> tuple[str, int]:
    """Rewrite one cell with one rule via the CLI; returns (source, hits)."""
    with tempfile.TemporaryDirectory() as tmp:
        tmp_path = Path(tmp)
        rules_dir = tmp_path / "rules"
        rules_dir.mkdir()
        (rules_dir / "measured.rule").write_text(rule_text, encoding="utf-8")
        cell_in = tmp_path / "cell.py"
        cell_out = tmp_path / "cell_out.py"
        cell_in.write_text(cell_source, encoding="utf-8")
        proc = subprocess.run(
            [*cli, "rewrite", "--rules", str(rules_dir), str(cell_in), "-o", str(cell_out)],
            capture_output=True,
            text=True,
        )
        if proc.returncode != 0:
            raise HarnessError(f"rewrite failed (exit {proc.returncode}): {proc.stderr.strip()}")
        hits = 0
        for line in proc.stdout.splitlines():
            if line.startswith("total applications:"):
                hits = int(line.partition(":")[2])
        return cell_out.read_text(encoding="utf-8"), hits


def measure_rule_speedups(
    rule_text: str,
    fixtures: list[tuple[str, list[pd.DataFrame]]],
    cfg: OptCheckConfig | None = None,
    cli: tuple[str, ...] = DEFAULT_CLI,
) -> list[SpeedupSample]:
    """Per-fixture original/rewritten runtime ratios, guards included.

    Raises NoHit if the rule fails to match a fixture cell.
    """
    cfg = cfg or OptCheckConfig(repetitions=30)
    samples: list[SpeedupSample] = []
    for cell_source, frames in fixtures:
        rewritten, hits = rewrite_via_cli(cell_source, rule_text, cli)
        if hits == 0:
            raise NoHit(f"rule did not match fixture cell: {cell_source!r}")
        # Micro-scale cells are too noisy for the MAD stability bound;
        # ratios here are directional, so the median alone is enough.
        t_orig = time_cell(cell_source, frames, cfg, check_stability=False)
        t_rewr = time_cell(rewritten, frames, cfg, check_stability=False)
        samples.append(SpeedupSample(cell_source, rewritten, t_orig, t_rewr))
    return samples
