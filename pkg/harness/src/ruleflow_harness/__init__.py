"""Validation harness and discovery pipeline for the ruleflow engine.

The harness talks to the engine exclusively through its command-line
interface (`ruleflow rewrite` / `ruleflow check-rule`), relying on the
frozen exit-code contract: 0 ok, 1 I/O or parse failure, 2 validation
failure.
"""

from ruleflow_harness.frames import ColumnSpec, DataFrameSpec, generate_dataframes
from ruleflow_harness.execution import ExecutionResult, HarnessError, run_cell
from ruleflow_harness.equiv import EquivVerdict, equiv_check
from ruleflow_harness.optcheck import OptCheckConfig, OptVerdict, opt_check, time_cell
from ruleflow_harness.speedup import NoHit, measure_rule_speedups
from ruleflow_harness.llm import (
    LlmUnavailable,
    MalformedResponse,
    MockLlmClient,
    ResponseSchema,
    TranscriptRouter,
)
from ruleflow_harness.pipeline import (
    CandidatePair,
    Cell,
    PairStatus,
    PipelineConfig,
    YieldReport,
    candidate_gen,
    extract_cells,
    feedback_gen,
    generalize_pair,
    run_pipeline,
)

__all__ = [
    "ColumnSpec",
    "DataFrameSpec",
    "generate_dataframes",
    "ExecutionResult",
    "HarnessError",
    "run_cell",
    "EquivVerdict",
    "equiv_check",
    "OptCheckConfig",
    "OptVerdict",
    "opt_check",
    "time_cell",
    "NoHit",
    "measure_rule_speedups",
    "LlmUnavailable",
    "MalformedResponse",
    "MockLlmClient",
    "ResponseSchema",
    "TranscriptRouter",
    "CandidatePair",
    "Cell",
    "PairStatus",
    "PipelineConfig",
    "YieldReport",
    "candidate_gen",
    "extract_cells",
    "feedback_gen",
    "generalize_pair",
    "run_pipeline",
]
