"""Shared fixtures and the per-criterion acceptance summary."""

import numpy as np
import pytest

from chiralchain import REFERENCE_PARAMS, derive_coefficients

_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion id")


def pytest_runtest_makereport(item, call):
    mark = item.get_closest_marker("criterion")
    if mark is None or call.when != "call" and not (call.when == "setup" and call.excinfo):
        return
    number, title = mark.args
    ok = call.excinfo is None
    entry = _CRITERIA.setdefault(number, {"title": title, "ok": True, "failed": []})
    if not ok:
        entry["ok"] = False
        entry["failed"].append(item.name)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        entry = _CRITERIA[number]
        status = "PASS" if entry["ok"] else "FAIL"
        line = f"criterion {number:2d}: {status}  {entry['title']}"
        if entry["failed"]:
            line += f"  (failing: {', '.join(entry['failed'])})"
        tr.write_line(line)


@pytest.fixture(scope="session")
def ref_params():
    return REFERENCE_PARAMS


@pytest.fixture(scope="session")
def ref_coeffs():
    return derive_coefficients(REFERENCE_PARAMS)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
