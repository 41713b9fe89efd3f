import math

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", deadline=None, suppress_health_check=[HealthCheck.too_slow], print_blob=True
)
settings.load_profile("default")

_criteria: dict[int, tuple[str, str]] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    """Record each acceptance test's outcome; a criterion passes only if all its tests pass.

    Expected failures count as FAIL, and so does a strict unexpected pass.
    """
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or report.when != "call":
        return
    number = marker.args[0]
    status, detail = _criteria.get(number, ("PASS", ""))
    if report.failed or hasattr(report, "wasxfail"):
        if call.excinfo is not None:
            lines = str(call.excinfo.value).strip().splitlines()
            reason = lines[0][:140] if lines else call.excinfo.typename
        else:
            reason = "unexpected pass of a strict xfail"
        if status == "PASS":
            detail = f"{item.name}: {reason}"
        status = "FAIL"
    _criteria[number] = (status, detail)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        status, detail = _criteria[number]
        line = f"criterion {number:2d}: {status}"
        if detail:
            line += f"  ({detail})"
        terminalreporter.write_line(line)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")


@pytest.fixture
def pi():
    return math.pi
