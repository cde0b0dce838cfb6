"""Shared fixtures: the acceptance suite's pass/fail line registry."""

import pytest

_acceptance_lines = []


@pytest.fixture
def acceptance_log():
    """Collect one status line per acceptance criterion.

    Lines are printed immediately (visible with -s or on failure) and repeated
    in a dedicated section of the terminal summary so a plain pytest run always
    shows them.
    """

    def log(line: str):
        _acceptance_lines.append(line)
        print(line)

    return log


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in _acceptance_lines:
            terminalreporter.write_line(line)
