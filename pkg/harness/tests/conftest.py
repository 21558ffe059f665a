from pathlib import Path

import pytest

from ruleflow_harness.frames import ColumnSpec, DataFrameSpec, generate_dataframes
from ruleflow_harness.llm import TranscriptRouter
from ruleflow_harness.optcheck import OptCheckConfig
from ruleflow_harness.pipeline import PipelineConfig

FIXTURES = Path(__file__).parent / "fixtures"

PIPELINE_SPEC = DataFrameSpec(
    n_rows=40,
    columns=[
        ColumnSpec("name", "str"),
        ColumnSpec("a", "float"),
        ColumnSpec("b", "int"),
    ],
    seed=7,
)

# Synthetic medians (ms) for the mock pipeline, keyed by cell source.
INJECTED_TIMINGS = {
    "df = df.drop(['name'], axis=1)": 1000.0,
    "df.pop('name')": 400.0,
    "df = df.drop(['b'], axis=1)": 1000.0,
    "df.pop('missing')": 400.0,
    "total = df['b'].sum()": 500.0,
    "df2 = df.rename(columns={'a': 'aa'})": 1000.0,
    "df2 = df.rename(columns=dict(a='aa'))": 400.0,
    "m = df['a'].min()": 300.0,
    "m = np.min(df['a'].values)": 100.0,
    "df = df.rename(columns={'a': 'aa'})": 1000.0,
    "df.rename(columns={'a': 'aa'}, inplace=True)": 400.0,
    "n = df.shape[0]": 1000.0,
    "n = len(df)": 400.0,
}


def injected_timer(source: str) -> float:
    return INJECTED_TIMINGS[source.strip()]


def fixture_runtime(source: str) -> float:
    # The head() cell stands in for a sub-threshold cell.
    return 0.2 if source.strip() == "small = df.head()" else 1.5


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def mock_notebooks() -> Path:
    return FIXTURES / "notebooks"


@pytest.fixture(scope="session")
def transcripts() -> TranscriptRouter:
    return TranscriptRouter(FIXTURES / "transcripts")


@pytest.fixture
def pipeline_cfg() -> PipelineConfig:
    return PipelineConfig(
        frame_spec=PIPELINE_SPEC,
        m_frames=3,
        opt_cfg=OptCheckConfig(),
        timer=injected_timer,
        runtime_fn=fixture_runtime,
    )


@pytest.fixture(scope="session")
def small_frames():
    return generate_dataframes(PIPELINE_SPEC, 3)
