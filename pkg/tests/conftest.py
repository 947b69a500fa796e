import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

# -- acceptance summary -----------------------------------------------------

_ACCEPTANCE: dict[str, tuple[int, str, str, float]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): numbered acceptance criterion")


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("criterion")
    if marker is None or call.when != "call" and not (call.when == "setup" and call.excinfo):
        return
    number, title = marker.args
    if call.excinfo is None:
        outcome = "PASS"
    elif call.excinfo.errisinstance(pytest.skip.Exception):
        outcome = "SKIP"
    else:
        outcome = "FAIL"
    prev = _ACCEPTANCE.get(item.nodeid)
    duration = call.stop - call.start
    if prev is None or prev[2] == "PASS":
        _ACCEPTANCE[item.nodeid] = (number, title, outcome, duration)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, outcome, duration in sorted(_ACCEPTANCE.values(), key=lambda r: (r[0], r[1])):
        terminalreporter.write_line(f"[{outcome}] {number:>2}. {title} ({duration:.2f}s)")
