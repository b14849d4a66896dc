import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

#: criterion number -> (title, outcome, notes)
ACCEPTANCE: dict = {}
NOTES: dict = {}


@pytest.fixture
def note(request):
    """Record a measured value next to an acceptance criterion's result line."""
    marker = request.node.get_closest_marker("criterion")

    def _note(text):
        NOTES.setdefault(marker.args[0], []).append(text)

    return _note


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or report.when not in ("setup", "call"):
        return
    if report.when == "setup" and report.passed:
        return
    number, title = marker.args
    prev = ACCEPTANCE.get(number, (title, "PASS"))[1]
    status = "PASS" if report.passed and prev == "PASS" else "FAIL"
    ACCEPTANCE[number] = (title, status)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        title, status = ACCEPTANCE[number]
        tr.write_line(f"criterion {number:>2} [{status}] {title}")
        for text in NOTES.get(number, []):
            tr.write_line(f"              {text}")
