import numpy as np
import pytest

from tunnelfwm.params import default_parameters, to_dimensionless

_CRITERIA: list[tuple[int, bool, str]] = []


@pytest.fixture(scope="session")
def defaults():
    return default_parameters()


@pytest.fixture(scope="session")
def default_system(defaults):
    return to_dimensionless(*defaults)


@pytest.fixture
def criterion():
    """Record and print one pass/fail line for a numbered acceptance criterion."""

    def record(number: int, ok, detail: str) -> None:
        ok = bool(ok)
        line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
        _CRITERIA.append((number, ok, line))
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for _, _, line in sorted(_CRITERIA, key=lambda c: c[0]):
        terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
