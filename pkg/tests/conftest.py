import pytest

_outcomes: dict[str, tuple[str, bool]] = {}


def pytest_collection_modifyitems(items):
    for item in items:
        marker = item.get_closest_marker("acceptance")
        if marker is not None and marker.args:
            _outcomes[item.nodeid] = (marker.args[0], None)


def pytest_runtest_logreport(report):
    if report.nodeid not in _outcomes:
        return
    label, passed = _outcomes[report.nodeid]
    if report.failed:
        _outcomes[report.nodeid] = (label, False)
    elif report.when == "call" and passed is None:
        _outcomes[report.nodeid] = (label, report.passed)


def pytest_terminal_summary(terminalreporter):
    ran = [(label, passed) for label, passed in _outcomes.values() if passed is not None]
    if not ran:
        return
    terminalreporter.section("acceptance criteria")
    for label, passed in ran:
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {label}")
    terminalreporter.write_line(f"{sum(p for _, p in ran)}/{len(ran)} criteria pass")
