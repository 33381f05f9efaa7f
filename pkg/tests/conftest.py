import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

# criterion number -> (passed, detail); filled by test_acceptance.py
CRITERIA: dict = {}


@pytest.fixture
def criterion(capsys):
    """Record and print one PASS/FAIL line for an acceptance criterion."""

    class Recorder:
        def __init__(self):
            self.num = None
            self.detail = ""

        def start(self, num):
            self.num = num
            CRITERIA[num] = (False, "did not finish")

        def done(self, ok, detail):
            self.detail = detail
            CRITERIA[self.num] = (bool(ok), detail)
            with capsys.disabled():
                print(f"\nCRITERION {self.num}: {'PASS' if ok else 'FAIL'} - {detail}")

    return Recorder()


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(CRITERIA):
        ok, detail = CRITERIA[num]
        terminalreporter.write_line(f"criterion {num:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
