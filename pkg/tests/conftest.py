import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

from corpus import SEED  # noqa: E402

_results: dict[int, tuple[str, list[str]]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(n, title): acceptance criterion number n")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("acceptance")
    if mark is None or rep.when != "call" and not rep.failed:
        return
    n, title = mark.args
    prev = _results.get(n, (title, []))
    prev[1].append("PASS" if rep.passed else "FAIL")
    _results[n] = prev


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    tr.write_line(f"corpus seed: {SEED}")
    for n in sorted(_results):
        title, outcomes = _results[n]
        status = "PASS" if outcomes and all(o == "PASS" for o in outcomes) else "FAIL"
        tr.write_line(f"criterion {n}: {status}  {title}")
