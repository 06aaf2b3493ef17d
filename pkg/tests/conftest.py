import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from nqobc._rng import stream  # noqa: E402
from nqobc.unitary import haar_sample  # noqa: E402

_criteria = {}


@pytest.fixture
def haar():
    """Factory for reproducible Haar frames: ``haar(n, key)``."""
    return lambda n, key=0: haar_sample(n, stream(2024, key))


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, text): acceptance criterion")


def pytest_runtest_logreport(report):
    crit = getattr(report, "criterion", None)
    if crit is None or report.when == "teardown":
        return
    # setup time counts too: shared fixtures do the heavy lifting for some criteria
    _, spent = _criteria.get(crit, ("", 0.0))
    if report.when == "call" or report.outcome != "passed":
        _criteria[crit] = (report.outcome.upper(), spent + report.duration)
    else:
        _criteria[crit] = ("PENDING", spent + report.duration)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is not None:
        rep.criterion = marker.args


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for (number, text), (outcome, duration) in sorted(_criteria.items()):
        terminalreporter.write_line(f"criterion {number:>2}: {outcome:<6} ({duration:6.1f}s) {text}")
