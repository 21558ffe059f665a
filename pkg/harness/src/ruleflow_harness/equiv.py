"""Testing-based equivalence checking of a cell and its rewrite.

Both cells run on deep copies of every generated frame. The verdict is
PASS only if, on every frame, the error status, the displayed output, and
every variable present in both final namespaces agree. Two null values
compare equal; dataframe comparison includes index, column order, and
dtypes, since a dtype change is a real semantic divergence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from ruleflow_harness.execution import run_cell


@dataclass(frozen=True)
class Divergence:
    frame_index: int
    kind: str  # "error" | "output" | "variable"
    detail: str


@dataclass
class EquivVerdict:
    passed: bool
    divergences: list[Divergence] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.passed


def values_equal(a: object, b: object) -> bool:
    """Deep, order-sensitive equality with null == null."""
    if isinstance(a, pd.DataFrame) or isinstance(b, pd.DataFrame):
        if not (isinstance(a, pd.DataFrame) and isinstance(b, pd.DataFrame)):
            return False
        try:
            pd.testing.assert_frame_equal(a, b, check_dtype=True, check_exact=True)
        except AssertionError:
            return False
        return True
    if isinstance(a, pd.Series) or isinstance(b, pd.Series):
        if not (isinstance(a, pd.Series) and isinstance(b, pd.Series)):
            return False
        try:
            pd.testing.assert_series_equal(a, b, check_dtype=True, check_exact=True)
        except AssertionError:
            return False
        return True
    if isinstance(a, np.ndarray) or isinstance(b, np.ndarray):
        if not (isinstance(a, np.ndarray) and isinstance(b, np.ndarray)):
            return False
        if a.shape != b.shape or a.dtype != b.dtype:
            return False
        if a.dtype.kind == "f":
            return bool(np.array_equal(a, b, equal_nan=True))
        return bool(np.array_equal(a, b))
    if _is_null(a) and _is_null(b):
        return True
    if _is_null(a) or _is_null(b):
        return False
    if isinstance(a, float) and isinstance(b, float):
        return a == b
    if isinstance(a, (list, tuple)):
        if type(a) is not type(b) or len(a) != len(b):
            return False
        return all(values_equal(x, y) for x, y in zip(a, b))
    if isinstance(a, dict):
        if not isinstance(b, dict) or set(a) != set(b):
            return False
        return all(values_equal(a[k], b[k]) for k in a)
    try:
        return bool(a == b)
    except Exception:
        return False


def _is_null(value: object) -> bool:
    if value is None:
        return True
    if isinstance(value, float) and math.isnan(value):
        return True
    try:
        return bool(pd.isna(value))
    except (TypeError, ValueError):
        return False


def _errors_equivalent(a: BaseException | None, b: BaseException | None) -> bool:
    if a is None and b is None:
        return True
    if a is None or b is None:
        return False
    return type(a) is type(b)


def equiv_check(original: str, candidate: str, frames: list[pd.DataFrame]) -> EquivVerdict:
    """PASS iff the two cells are observationally equal on every frame."""
    divergences: list[Divergence] = []
    for index, frame in enumerate(frames):
        res_orig = run_cell(original, frame)
        res_cand = run_cell(candidate, frame)
        if not _errors_equivalent(res_orig.error, res_cand.error):
            divergences.append(
                Divergence(index, "error", f"{res_orig.error!r} vs {res_cand.error!r}")
            )
            continue
        if res_orig.error is not None:
            continue  # both failed the same way; state is unreliable
        if res_orig.displayed_output != res_cand.displayed_output:
            divergences.append(Divergence(index, "output", "displayed output differs"))
        shared = set(res_orig.variable_state) & set(res_cand.variable_state)
        for name in sorted(shared):
            if not values_equal(res_orig.variable_state[name], res_cand.variable_state[name]):
                divergences.append(Divergence(index, "variable", name))
    return EquivVerdict(not divergences, divergences)
