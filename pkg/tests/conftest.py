import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

_VERDICTS = pytest.StashKey[dict]()


@pytest.fixture
def report(request):
    """``report(criterion, passed, detail)`` records one acceptance verdict."""
    verdicts = request.config.stash.setdefault(_VERDICTS, {})

    def record(criterion: int, passed: bool, detail: str) -> bool:
        verdicts[criterion] = (bool(passed), detail)
        return bool(passed)

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    verdicts = config.stash.get(_VERDICTS, {})
    if not verdicts:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(verdicts):
        passed, detail = verdicts[k]
        terminalreporter.write_line(f"criterion {k}: {'PASS' if passed else 'FAIL'}  {detail}")
