import time

import pytest

from trapstab.sweep import GridSpec, sweep_grid

DIAGRAM = GridSpec(0.0, 2.0, -1.0, 1.5, 400, 400)

_reports = {}


class GridCache:
    """Session-wide cache of the 400x400 alpha=0.5 diagrams, keyed by theta."""

    def __init__(self):
        self._grids = {}

    def get(self, theta, spec=DIAGRAM, alpha=0.5):
        key = (theta, spec, alpha)
        if key not in self._grids:
            t0 = time.perf_counter()
            grid = sweep_grid(alpha, theta, spec)
            self._grids[key] = (grid, time.perf_counter() - t0)
        return self._grids[key][0]

    def elapsed(self, theta, spec=DIAGRAM, alpha=0.5):
        return self._grids[(theta, spec, alpha)][1]


@pytest.fixture(scope="session")
def grids():
    return GridCache()


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    if report.when == "call" or report.failed:
        detail = dict(report.user_properties).get("detail", "")
        name = report.nodeid.split("::")[-1]
        prev = _reports.get(name)
        if prev is None or report.failed:
            _reports[name] = (report.outcome, detail)


def pytest_terminal_summary(terminalreporter):
    if not _reports:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for name in sorted(_reports):
        outcome, detail = _reports[name]
        status = {"passed": "PASS", "failed": "FAIL"}.get(outcome, outcome.upper())
        tr.write_line(f"{status}  {name}  {detail}")
