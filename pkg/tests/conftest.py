"""Shared pytest hooks: test-local imports and the acceptance summary.

Tests marked ``@pytest.mark.criterion(k, title)`` report one line each through
the ``criterion_report`` fixture; the lines are printed together at the end of
the session, and a test that fails before reporting is listed as FAIL.
"""
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

_LINES = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(k, title): acceptance criterion number k")


def _marker(item):
    m = item.get_closest_marker("criterion")
    return (m.args[0], m.args[1]) if m else None


@pytest.fixture
def criterion_report(request):
    key = _marker(request.node)
    if key is None:
        raise RuntimeError("criterion_report needs a criterion marker")

    def report(ok: bool, detail: str):
        _LINES[key[0]] = (key[1], bool(ok), detail)
        print(f"criterion {key[0]:>2} {'PASS' if ok else 'FAIL'}  {key[1]}: {detail}")
        return ok

    return report


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    key = _marker(item)
    if key is None or rep.when != "call":
        return
    if rep.failed:
        title, _, detail = _LINES.get(key[0], (key[1], False, "raised before reporting"))
        _LINES[key[0]] = (title, False, detail)


def pytest_terminal_summary(terminalreporter):
    if not _LINES:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for k in sorted(_LINES):
        title, ok, detail = _LINES[k]
        terminalreporter.write_line(f"criterion {k:>2} {'PASS' if ok else 'FAIL'}  {title}: {detail}")
