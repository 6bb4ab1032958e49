from __future__ import annotations

import contextlib
import time

import pytest

_LINES: dict[int, str] = {}


class CriterionLog:
    """Records one PASS/FAIL line per acceptance criterion."""

    @contextlib.contextmanager
    def criterion(self, number: int, title: str):
        state = {"detail": ""}
        start = time.perf_counter()
        try:
            yield state
        except BaseException as exc:
            _LINES[number] = f"criterion {number:2d} FAIL  {title}: {type(exc).__name__}: {exc}"[:400]
            print(_LINES[number])
            raise
        took = time.perf_counter() - start
        _LINES[number] = f"criterion {number:2d} PASS  {title}: {state['detail']} ({took:.1f} s)"
        print(_LINES[number])


@pytest.fixture(scope="session")
def acceptance() -> CriterionLog:
    return CriterionLog()


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(_LINES):
            terminalreporter.write_line(_LINES[k])
