from __future__ import annotations

import contextlib

import pytest

_ACCEPTANCE: list[str] = []


@pytest.fixture
def criterion():
    """Context manager that records one PASS/FAIL line per acceptance criterion."""

    @contextlib.contextmanager
    def run(number: int, title: str):
        notes: list[str] = []
        try:
            yield notes
        except BaseException:
            line = f"criterion {number:>2}: FAIL  {title}"
            _ACCEPTANCE.append(line + (f" ({'; '.join(notes)})" if notes else ""))
            print(_ACCEPTANCE[-1])
            raise
        line = f"criterion {number:>2}: PASS  {title}"
        _ACCEPTANCE.append(line + (f" ({'; '.join(notes)})" if notes else ""))
        print(_ACCEPTANCE[-1])

    return run


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE):
            terminalreporter.write_line(line)
