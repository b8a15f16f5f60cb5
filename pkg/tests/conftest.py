from __future__ import annotations

import pytest

_RESULTS: dict[str, tuple[str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(name): acceptance criterion reported in the terminal summary")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    name = marker.args[0]
    detail = getattr(item, "criterion_detail", "")
    if report.when == "call" or (report.when == "setup" and report.failed):
        _RESULTS[name] = ("PASS" if report.passed else "FAIL", detail)


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, (status, detail) in _RESULTS.items():
        suffix = f"  ({detail})" if detail else ""
        terminalreporter.write_line(f"{status}  {name}{suffix}")
