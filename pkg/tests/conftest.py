from importlib import resources
import sys
from pathlib import Path

import pytest

from musener.corpus import read_corpus, read_schedule
from musener.features import load_gazetteers

FIXTURES = Path(str(resources.files("musener") / "data" / "fixtures"))


@pytest.fixture(scope="session")
def gazetteers():
    return load_gazetteers()


@pytest.fixture(scope="session")
def fixtures_dir():
    return FIXTURES


@pytest.fixture(scope="session")
def train_corpus():
    return read_corpus(FIXTURES / "separable_train.iob")


@pytest.fixture(scope="session")
def user_test():
    return read_corpus(FIXTURES / "user_test.iob")


@pytest.fixture(scope="session")
def schedule():
    return read_schedule(FIXTURES / "schedule.jsonl")


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
