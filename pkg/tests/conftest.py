import pathlib
import sys

import pytest

sys.path.insert(0, str(pathlib.Path(__file__).parent))

from ellislab.substitution import parse_substitution  # noqa: E402

CORPUS = pathlib.Path(__file__).resolve().parent.parent / "corpus"


def load(name):
    return parse_substitution((CORPUS / f"{name}.sub").read_text())


@pytest.fixture
def corpus_dir():
    return CORPUS


@pytest.fixture
def thue_morse():
    return load("thue_morse")


@pytest.fixture
def toeplitz_abbaa():
    return load("toeplitz_abbaa")


@pytest.fixture
def toeplitz_ababa():
    return load("toeplitz_ababa")


ACCEPTANCE_LINES = []


def record(criterion, passed, detail):
    line = f"[{'PASS' if passed else 'FAIL'}] criterion {criterion}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
