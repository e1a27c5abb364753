from __future__ import annotations

import pytest

_CRITERIA: dict[int, str] = {}


@pytest.fixture
def record():
    """Store and print one ``CRITERION n: PASS/FAIL - details`` line."""

    def _record(number: int, passed: bool, details: str) -> bool:
        line = f"CRITERION {number}: {'PASS' if passed else 'FAIL'} - {details}"
        _CRITERIA[number] = line
        print(line)
        return passed

    return _record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for number in sorted(_CRITERIA):
        terminalreporter.write_line(_CRITERIA[number])
