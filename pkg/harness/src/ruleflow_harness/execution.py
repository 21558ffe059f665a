"""Sandboxed cell execution.

Cells run against a fresh deep copy of the input frame in an isolated
namespace preloaded with pandas/numpy under their conventional names, so
subject code never touches the harness's master data.
"""

from __future__ import annotations

import contextlib
import copy
import io
import time
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

INPUT_FRAME_NAME = "df"


class HarnessError(RuntimeError):
    """Harness-side failure, distinct from a FAIL verdict."""


@dataclass
class ExecutionResult:
    variable_state: dict[str, object]
    displayed_output: str
    runtime: float  # seconds, cell body only
    error: BaseException | None = None

    @property
    def failed(self) -> bool:
        return self.error is not None


def _base_namespace(frame: pd.DataFrame | None) -> dict[str, object]:
    ns: dict[str, object] = {
        "pd": pd,
        "pandas": pd,
        "np": np,
        "numpy": np,
    }
    if frame is not None:
        ns[INPUT_FRAME_NAME] = copy.deepcopy(frame)
    return ns


def run_cell(source: str, frame: pd.DataFrame | None = None) -> ExecutionResult:
    """Execute a cell body on a private copy of the frame.

    The frame copy happens before the clock starts; only the cell body is
    timed. Subject exceptions become part of the result, not harness
    failures.
    """
    try:
        code = compile(source, "<cell>", "exec")
    except SyntaxError as exc:
        return ExecutionResult({}, "", 0.0, error=exc)
    namespace = _base_namespace(frame)
    preloaded = set(namespace)
    stdout = io.StringIO()
    error: BaseException | None = None
    started = time.perf_counter()
    try:
        with contextlib.redirect_stdout(stdout):
            exec(code, namespace)
    except BaseException as exc:  # subject failures are data, not bugs
        error = exc
    runtime = time.perf_counter() - started

    state = {
        name: value
        for name, value in namespace.items()
        if not name.startswith("_") and (name not in preloaded or name == INPUT_FRAME_NAME)
    }
    return ExecutionResult(state, stdout.getvalue(), runtime, error=error)
