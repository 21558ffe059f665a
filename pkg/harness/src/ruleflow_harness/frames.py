"""Deterministic random dataframe generation.

A DataFrameSpec describes the shape of the test inputs; generation is a
pure function of (spec, m, index), so the same spec always produces the
same frames.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import pandas as pd

_VALUE_TYPES = ("int", "float", "str", "datetime", "category")

_STR_POOL = ["alpha", "beta", "gamma", "delta", "epsilon", "zeta"]
_CATEGORY_POOL = ["low", "mid", "high"]


class InvalidSpec(ValueError):
    pass


@dataclass(frozen=True)
class ColumnSpec:
    name: str
    value_type: str
    null_fraction: float = 0.0


@dataclass
class DataFrameSpec:
    n_rows: int
    columns: list[ColumnSpec]
    seed: int = 0

    def validate(self) -> None:
        if self.n_rows < 0:
            raise InvalidSpec("n_rows must be >= 0")
        names = [c.name for c in self.columns]
        if len(set(names)) != len(names):
            raise InvalidSpec("column names must be unique")
        for col in self.columns:
            if col.value_type not in _VALUE_TYPES:
                raise InvalidSpec(f"unknown value type {col.value_type!r}")
            if not 0.0 <= col.null_fraction <= 1.0:
                raise InvalidSpec(f"null_fraction out of range for {col.name!r}")


def _column_values(col: ColumnSpec, n: int, rng: np.random.Generator) -> pd.Series:
    if col.value_type == "int":
        values = pd.Series(rng.integers(-1000, 1000, size=n))
    elif col.value_type == "float":
        values = pd.Series(rng.normal(0.0, 100.0, size=n))
    elif col.value_type == "str":
        values = pd.Series(rng.choice(_STR_POOL, size=n))
    elif col.value_type == "datetime":
        base = pd.Timestamp("2020-01-01")
        offsets = rng.integers(0, 3650, size=n)
        values = pd.Series(base + pd.to_timedelta(offsets, unit="D"))
    else:  # category
        values = pd.Series(pd.Categorical(rng.choice(_CATEGORY_POOL, size=n)))
    if col.null_fraction > 0.0:
        mask = rng.random(n) < col.null_fraction
        values = values.mask(pd.Series(mask))
    return values


def generate_dataframes(spec: DataFrameSpec, m: int) -> list[pd.DataFrame]:
    """Generate m frames; frame i is fully determined by (spec.seed, i)."""
    spec.validate()
    frames = []
    for index in range(m):
        rng = np.random.default_rng([spec.seed, index])
        data = {col.name: _column_values(col, spec.n_rows, rng) for col in spec.columns}
        frames.append(pd.DataFrame(data))
    return frames
