import re

import pytest

_VERDICTS = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(cid, title): acceptance criterion checked by this test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    cid, title = marker.args
    detail = dict(item.user_properties).get("detail", "")
    if report.when == "call":
        _VERDICTS[cid] = ("PASS" if report.passed else "FAIL", title, detail)
    elif report.when == "setup" and report.failed:
        _VERDICTS[cid] = ("ERROR", title, "setup failed")


def _natural(cid):
    number, suffix = re.match(r"C(\d+)(.*)", cid).groups()
    return int(number), suffix


def pytest_terminal_summary(terminalreporter):
    if not _VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for cid in sorted(_VERDICTS, key=_natural):
        verdict, title, detail = _VERDICTS[cid]
        line = f"{verdict:5s} {cid:4s} {title}"
        if detail:
            line += f" | {detail}"
        terminalreporter.write_line(line)
