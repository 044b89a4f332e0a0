import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

_ACCEPTANCE = {}


class AcceptanceRecorder:
    def __init__(self, number, title):
        self.number = number
        self.title = title
        self.checks = []

    def check(self, ok, detail):
        self.checks.append((bool(ok), detail))

    @property
    def ok(self):
        return bool(self.checks) and all(ok for ok, _ in self.checks)

    def line(self):
        status = "PASS" if self.ok else "FAIL"
        failed = [d for ok, d in self.checks if not ok]
        detail = "; ".join(failed) if failed else "; ".join(d for _, d in self.checks)
        return f"criterion {self.number} [{status}] {self.title}: {detail}"

    def finish(self):
        print(self.line())
        failed = [d for ok, d in self.checks if not ok]
        assert not failed, "; ".join(failed)


@pytest.fixture
def criterion(request):
    def make(number, title):
        rec = AcceptanceRecorder(number, title)
        _ACCEPTANCE[number] = rec
        return rec

    return make


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        terminalreporter.write_line(_ACCEPTANCE[number].line())
