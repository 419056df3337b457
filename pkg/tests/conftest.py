import pytest

from phasebench.capture import CaptureMeta

_acceptance_results = []


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): exit criterion check")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        number, title = marker.args
        _acceptance_results.append((number, title, item.name, report.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance_results:
        return
    terminalreporter.section("acceptance criteria")
    by_number = {}
    for number, title, name, outcome in _acceptance_results:
        by_number.setdefault((number, title), []).append((name, outcome))
    for (number, title), runs in sorted(by_number.items()):
        ok = all(o == "passed" for _, o in runs)
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title}")
        for name, outcome in runs:
            if outcome != "passed":
                terminalreporter.write_line(f"         {name}: {outcome}")


@pytest.fixture
def meta():
    return CaptureMeta(sample_rate=1e6, v_core=0.9, r_shunt=0.05, config_name="test")
