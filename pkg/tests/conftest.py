"""Shared fixtures.  Acceptance criteria report one line each at the end of the run."""

import pytest

_CRITERIA: dict[int, tuple[bool, str, str]] = {}


@pytest.fixture
def criterion():
    """Record the outcome of a numbered acceptance criterion: criterion(n, title, ok, detail)."""
    def record(number, title, ok, detail=""):
        _CRITERIA[number] = (bool(ok), title, detail)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        ok, title, detail = _CRITERIA[n]
        terminalreporter.write_line(f"criterion {n:2d} {'PASS' if ok else 'FAIL'}  {title}: {detail}")
