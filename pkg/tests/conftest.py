"""Shared pytest plumbing: acceptance criterion reporting.

Each acceptance test wraps its body in the `criterion` context manager so
that every criterion contributes exactly one PASS/FAIL line, echoed both
into the captured test output and into the terminal summary at the end of
the run.
"""

from __future__ import annotations

from contextlib import contextmanager

import pytest

_CRITERION_LINES: list[str] = []


@pytest.fixture
def criterion():
    @contextmanager
    def check(num: int, desc: str):
        try:
            yield
        except BaseException:
            line = f"CRITERION {num}: FAIL - {desc}"
            _CRITERION_LINES.append(line)
            print(line)
            raise
        line = f"CRITERION {num}: PASS - {desc}"
        _CRITERION_LINES.append(line)
        print(line)

    return check


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if _CRITERION_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_CRITERION_LINES):
            terminalreporter.write_line(line)
