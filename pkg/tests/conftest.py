"""Collects one pass/fail line per acceptance criterion for the terminal summary."""

import pytest

ACCEPTANCE: dict[int, str] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or rep.when != "call":
        return
    n, title = marker.args
    passed = rep.passed and not hasattr(rep, "wasxfail")
    reason = ""
    if not passed and call.excinfo is not None:
        reason = f" ({call.excinfo.typename}: {str(call.excinfo.value).splitlines()[0][:90]})"
    ACCEPTANCE[n] = f"criterion {n:>2}: {'PASS' if passed else 'FAIL'}  {title}{reason}"


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[n])
