from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

from grademiner import _kernels
from grademiner.records import load_csv

ROOT = Path(__file__).resolve().parents[1]
TABLE1 = ROOT / "fixtures" / "table1.csv"

settings.register_profile(
    "default", deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@pytest.fixture(scope="session", autouse=True)
def _compiled_kernels():
    # JIT compile once so timing assertions measure the algorithms
    _kernels.warmup()


@pytest.fixture(scope="session")
def table1_path():
    return TABLE1


@pytest.fixture(scope="session")
def table1():
    return load_csv(TABLE1)


_ACCEPTANCE = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance exit criterion")


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    crit = dict(report.user_properties).get("criterion")
    if crit is None:
        return
    number, title = crit
    prev = _ACCEPTANCE.get(number, (title, True))
    _ACCEPTANCE[number] = (title, prev[1] and report.outcome == "passed")


def pytest_collection_modifyitems(items):
    for item in items:
        m = item.get_closest_marker("criterion")
        if m is not None:
            item.user_properties.append(("criterion", tuple(m.args)))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        title, ok = _ACCEPTANCE[number]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  criterion {number}: {title}")
