import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

# criterion number -> (passed, detail)
_RESULTS: dict[int, tuple[bool, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")


@pytest.fixture
def record(request):
    """Record the verdict of an acceptance criterion."""
    marker = request.node.get_closest_marker("criterion")
    n = marker.args[0]

    def _record(passed: bool, detail: str):
        _RESULTS[n] = (bool(passed), detail)
        return passed

    return _record


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or rep.when != "call":
        return
    n = marker.args[0]
    if rep.failed:
        prev = _RESULTS.get(n)
        detail = prev[1] if prev else f"error: {call.excinfo.typename}: {call.excinfo.value}"
        _RESULTS[n] = (False, detail)


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_RESULTS):
        ok, detail = _RESULTS[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'} ({detail})")


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)
