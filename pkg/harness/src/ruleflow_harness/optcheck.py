"""Runtime-improvement acceptance check.

A candidate passes only if it clears both an absolute and a relative
threshold:

    delta = t_orig - t_cand - tau_a          (milliseconds)
    rel   = t_orig / t_cand - tau_r          (speedup factor)
    PASS iff min(delta, rel) >= 0

`tau_r` bounds the speedup factor: with the default tau_r = 2 the
candidate must run at least twice as fast, which is what makes the
relative threshold satisfiable alongside an absolute one.
"""

from __future__ import annotations

import statistics
from dataclasses import dataclass
from typing import Callable

import pandas as pd

from ruleflow_harness.execution import HarnessError, run_cell

Timer = Callable[[str], float]  # source -> median runtime in milliseconds


@dataclass
class OptCheckConfig:
    tau_a: float = 150.0  # ms
    tau_r: float = 2.0
    repetitions: int = 5
    warmups: int = 2
    stability_limit: float = 0.25  # max MAD / median

    def validate(self) -> None:
        if self.tau_a < 0:
            raise ValueError("tau_a must be >= 0")
        if self.tau_r < 1:
            raise ValueError("tau_r must be >= 1")
        if self.repetitions < 3:
            raise ValueError("repetitions must be >= 3")


@dataclass
class OptVerdict:
    passed: bool
    t_orig_ms: float
    t_cand_ms: float
    delta_ms: float
    rel: float

    @property
    def ratio(self) -> float:
        return self.t_orig_ms / self.t_cand_ms

    def __bool__(self) -> bool:
        return self.passed


def time_cell(
    source: str,
    frames: list[pd.DataFrame],
    cfg: OptCheckConfig,
    check_stability: bool = True,
) -> float:
    """Median runtime in ms over warmups + repetitions, across all frames.

    Every execution gets a fresh copy of the frame, so in-place rewrites
    cannot poison later repetitions.
    """
    samples: list[float] = []
    for frame in frames:
        for _ in range(cfg.warmups):
            run_cell(source, frame)
        for _ in range(cfg.repetitions):
            result = run_cell(source, frame)
            if result.error is not None:
                raise HarnessError(f"cell failed during timing: {result.error!r}")
            samples.append(result.runtime * 1000.0)
    median = statistics.median(samples)
    if check_stability and median > 0:
        mad = statistics.median(abs(s - median) for s in samples)
        if mad > cfg.stability_limit * median:
            raise HarnessError(
                f"timing unstable: MAD {mad:.3f} ms exceeds "
                f"{cfg.stability_limit:.0%} of median {median:.3f} ms"
            )
    return median


def opt_check(
    original: str,
    candidate: str,
    frames: list[pd.DataFrame],
    cfg: OptCheckConfig | None = None,
    timer: Timer | None = None,
) -> OptVerdict:
    """Measure both cells and apply the two-threshold acceptance rule.

    `timer` overrides the measurement (source -> median ms); tests inject
    synthetic timings through it so the arithmetic is exact.
    """
    cfg = cfg or OptCheckConfig()
    cfg.validate()
    if timer is None:
        timer = lambda source: time_cell(source, frames, cfg)
    t_orig = timer(original)
    t_cand = timer(candidate)
    if t_cand <= 0:
        raise HarnessError("candidate runtime must be positive")
    delta = t_orig - t_cand - cfg.tau_a
    rel = t_orig / t_cand - cfg.tau_r
    return OptVerdict(min(delta, rel) >= 0, t_orig, t_cand, delta, rel)
