import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

# acceptance outcomes collected for the terminal summary
ACCEPTANCE_LINES: dict[str, str] = {}


@pytest.fixture
def acceptance():
    def record(key: str, passed: bool, detail: str = ""):
        ACCEPTANCE_LINES[key] = f"[{'PASS' if passed else 'FAIL'}] {key}" + (f": {detail}" if detail else "")
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
