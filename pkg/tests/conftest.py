import pytest

from helpers import load_dataset

VERDICTS: list[str] = []


@pytest.fixture(scope="session")
def cora():
    return load_dataset("cora")


@pytest.fixture(scope="session")
def citeseer():
    return load_dataset("citeseer")


@pytest.fixture
def verdict():
    """Record one PASS/FAIL line for an acceptance criterion, then assert it."""

    def record(criterion: str, ok: bool, detail: str) -> None:
        line = f"{'PASS' if ok else 'FAIL'}  criterion {criterion}: {detail}"
        VERDICTS.append(line)
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in VERDICTS:
            terminalreporter.write_line(line)
