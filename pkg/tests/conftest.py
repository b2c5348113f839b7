import pytest

_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion n")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    # the call phase decides, but a fixture error during setup also counts
    if mark is None or (rep.when != "call" and not rep.failed):
        return
    n, title = mark.args
    detail = dict(item.user_properties).get("detail", "")
    _CRITERIA[n] = ("PASS" if rep.passed else "FAIL", title, detail)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        verdict, title, detail = _CRITERIA[n]
        terminalreporter.write_line(f"[{verdict}] criterion {n:>2}: {title}" + (f" | {detail}" if detail else ""))
