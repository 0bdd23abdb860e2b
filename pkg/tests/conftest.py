from __future__ import annotations

import pytest

_SCOREBOARD: list[str] = []


@pytest.fixture(scope="session")
def scoreboard() -> list[str]:
    return _SCOREBOARD


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if _SCOREBOARD:
        terminalreporter.section("acceptance scoreboard")
        for line in _SCOREBOARD:
            terminalreporter.write_line(line)
