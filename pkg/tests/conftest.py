"""Prints one PASS/FAIL line per acceptance criterion after the run."""

import pytest

_outcomes: dict[int, tuple[str, list[str]]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion number and title")


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("criterion")
    if marker is None or call.when != "call":
        return
    n, title = marker.args
    prev = _outcomes.get(n, (title, []))
    failed = call.excinfo is not None and not call.excinfo.errisinstance(pytest.skip.Exception)
    prev[1].append("FAIL" if failed else "PASS")
    _outcomes[n] = prev


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(_outcomes):
        title, results = _outcomes[n]
        status = "FAIL" if "FAIL" in results else "PASS"
        tr.write_line(f"criterion {n:2d}: {status}  {title}")
