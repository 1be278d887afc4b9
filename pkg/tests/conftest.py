from __future__ import annotations

import os
import sys

sys.path.insert(0, os.path.dirname(__file__))

# (criterion, description, passed) in the order the checks ran
ACCEPTANCE_LINES: list[tuple[int, str, bool]] = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for crit, text, ok in sorted(ACCEPTANCE_LINES, key=lambda r: r[0]):
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {crit}: {text}")
