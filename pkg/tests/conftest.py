import pytest

# criterion number -> (passed, detail), filled by test_acceptance.py
CRITERIA: dict = {}


@pytest.fixture
def criterion(request):
    """Record the outcome of an acceptance criterion under its number."""
    note = {"detail": ""}
    request.node.criterion_note = note
    return note


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker and rep.when == "call":
        number = marker.args[0]
        detail = getattr(item, "criterion_note", {}).get("detail", "")
        if rep.failed:
            msg = str(call.excinfo.value).splitlines()[0] if call.excinfo else ""
            detail = (detail + "; " if detail else "") + msg
        CRITERIA[number] = {"passed": rep.passed, "detail": detail}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(CRITERIA):
        res = CRITERIA[number]
        status = "PASS" if res.get("passed") else "FAIL"
        terminalreporter.write_line(f"criterion {number}: {status}  {res.get('detail', '')}")
