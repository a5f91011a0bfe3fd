"""Collects acceptance outcomes and prints one PASS/FAIL line per criterion."""
from collections import defaultdict

import pytest

_OUTCOMES = defaultdict(list)  # number -> [(passed, subcase, detail)]
_TITLES = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    # record the call phase, or a setup error that prevented it
    if rep.when == "call" or (rep.when == "setup" and rep.failed):
        number, title = marker.args
        _TITLES[number] = title
        sub = item.callspec.id if hasattr(item, "callspec") else ""
        detail = dict(item.user_properties).get("detail", "")
        _OUTCOMES[number].append((rep.passed, sub, detail))


def pytest_terminal_summary(terminalreporter):
    if not _OUTCOMES:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number in sorted(_OUTCOMES):
        results = _OUTCOMES[number]
        ok = all(passed for passed, _, _ in results)
        tr.write_line(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {_TITLES[number]}")
        for passed, sub, detail in results:
            tag = "ok  " if passed else "FAIL"
            label = f"[{sub}] " if sub else ""
            tr.write_line(f"      {tag} {label}{detail}")
