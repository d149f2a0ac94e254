"""Pytest configuration; shared helpers live in oracles.py."""

import oracles


def pytest_terminal_summary(terminalreporter):
    if oracles.ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in oracles.ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
