import sys
from pathlib import Path

import pytest

TESTS_DIR = Path(__file__).parent
sys.path.insert(0, str(TESTS_DIR))

from ruleflow.corpus import load_corpus  # noqa: E402

FIXTURES = TESTS_DIR / "fixtures"
RULES_DIR = FIXTURES / "rules"
INVALID_RULES_DIR = FIXTURES / "invalid_rules"


@pytest.fixture(scope="session")
def rules_dir() -> Path:
    return RULES_DIR


@pytest.fixture(scope="session")
def invalid_rules_dir() -> Path:
    return INVALID_RULES_DIR


@pytest.fixture(scope="session")
def corpus():
    return load_corpus(RULES_DIR)
