"""Shared test plumbing: the acceptance report printed at the end of a run."""

import pytest

_REPORT = {}


class CriterionLog:
    """Collects one pass/fail line per acceptance criterion."""

    def record(self, number, title, passed, detail=""):
        line = f"criterion {number} [{'PASS' if passed else 'FAIL'}] {title}: {detail}"
        _REPORT[number] = line
        print(line)
        return passed


@pytest.fixture(scope="session")
def criteria():
    return CriterionLog()


def pytest_terminal_summary(terminalreporter):
    if not _REPORT:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_REPORT):
        terminalreporter.write_line(_REPORT[number])
