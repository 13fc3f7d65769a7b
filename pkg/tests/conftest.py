import itertools
import sys
from datetime import datetime, timedelta, timezone

import pytest

from gcc_memory import init_repo
from gcc_memory.model import format_ts

T0 = datetime(2025, 1, 1, tzinfo=timezone.utc)


class TickClock:
    """Advances one second per call."""

    def __init__(self, start=T0, step=1):
        self._ticks = itertools.count()
        self.start = start
        self.step = step

    def __call__(self):
        return self.start + timedelta(seconds=self.step * next(self._ticks))


@pytest.fixture
def clock():
    return TickClock()


@pytest.fixture
def repo(tmp_path):
    return init_repo(tmp_path, "Build a CLI", ["scaffold", "tests"])


def ts(seconds=0):
    return format_ts(T0 + timedelta(seconds=seconds))


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    if report.when == "call":
        item.rep_call = report


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    results = getattr(module, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        status, summary = results[number]
        terminalreporter.write_line(f"criterion {number}: {status}  {summary}")
