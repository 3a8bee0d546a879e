from pathlib import Path

import numpy as np
import pytest
from hypothesis import settings

from grimtrigger import load_allocation, load_model

DATA = Path(__file__).resolve().parent.parent / "data"

settings.register_profile("default", deadline=None, max_examples=60, derandomize=True)
settings.load_profile("default")


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")


_results: dict[int, list[bool]] = {}


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.failed):
        return
    marks = [m for m in getattr(report, "criterion", ())]
    for n in marks:
        _results.setdefault(n, []).append(report.passed)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    rep.criterion = tuple(m.args[0] for m in item.iter_markers("criterion"))


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_results):
        ok = all(_results[n])
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}")


@pytest.fixture
def partial_reveal():
    m = load_model(DATA / "partial_reveal.json")
    return m, load_allocation(m, DATA / "partial_reveal_alloc.json")


@pytest.fixture
def cyclic():
    m = load_model(DATA / "cyclic.json")
    return m, load_allocation(m, DATA / "cyclic_alloc.json")


@pytest.fixture
def car():
    m = load_model(DATA / "car.json")
    return m, load_allocation(m, DATA / "car_alloc.json")


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)
