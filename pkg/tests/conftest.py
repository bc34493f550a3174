"""Collects the acceptance PASS/FAIL lines and repeats them after the run."""

import pytest

ACCEPTANCE_LINES = []


@pytest.fixture
def report():
    """``report(number, title, ok, detail)`` prints and records one verdict line."""
    def _report(number, title, ok, detail=""):
        line = f"[{number}] {'PASS' if ok else 'FAIL'} {title}" + (f" ({detail})" if detail else "")
        print(line)
        ACCEPTANCE_LINES.append(line)
        return ok
    return _report


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(line)
