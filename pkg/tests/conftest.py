"""Shared fixtures and the per-criterion acceptance summary."""

from __future__ import annotations

from collections import defaultdict
from fractions import Fraction

import pytest

from highway_ptas.dissection import Params

CRITERIA = {
    1: "oracle agreement (brute force vs sweep)",
    2: "soundness of reported profits",
    3: "good drivers within budget after scaling",
    4: "table root dominates the oracle dissection",
    5: "lifting keeps the rounded profit",
    6: "derandomized equals best single draw",
    7: "segment compositions match edge brute force",
    8: "tollbooth and highway tables coincide on paths",
    9: "MaxFS interval guarantee",
    10: "MaxFS table dominates the induced dissection",
    11: "reports are deterministic",
}

_outcomes: dict[int, list[bool]] = defaultdict(list)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion checked by this test")


def pytest_runtest_logreport(report):
    number = getattr(report, "criterion", None)
    if number is None:
        return
    if report.when == "call" or report.failed:
        _outcomes[number].append(report.passed and not report.skipped)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    marker = item.get_closest_marker("criterion")
    if marker is not None:
        outcome.get_result().criterion = marker.args[0]


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for number, title in CRITERIA.items():
        results = _outcomes.get(number)
        if not results:
            status = "NOT RUN"
        else:
            status = "PASS" if all(results) else "FAIL"
        terminalreporter.write_line(f"criterion {number:2d} {status:7s} {title}")


@pytest.fixture(scope="session")
def half() -> Params:
    return Params.from_epsilon(Fraction(1, 2))
