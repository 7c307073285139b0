import re

import numpy as np
import pytest

_CRITERION = re.compile(r"test_acceptance\.py::test_c(\d\d)[a-z]?_")
_results: dict[int, dict[str, str]] = {}


def pytest_runtest_logreport(report):
    m = _CRITERION.search(report.nodeid)
    if not m:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        k = int(m.group(1))
        name = report.nodeid.split("::")[-1]
        _results.setdefault(k, {})[name] = report.outcome


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_results):
        outcomes = _results[k]
        verdict = "PASS" if all(o == "passed" for o in outcomes.values()) else "FAIL"
        names = ", ".join(sorted(outcomes))
        terminalreporter.write_line(f"criterion {k:2d}: {verdict}  ({names})")


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)
