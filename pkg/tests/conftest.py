import pathlib

import numpy as np
import pytest

from cpm import VariableRegistry, make_factor
from cpm.fixtures import random_factor

DATA = pathlib.Path(__file__).parent / "data"

_acceptance = []


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None or not marker.args:
        return
    if rep.when == "call" or (rep.when == "setup" and rep.outcome != "passed"):
        metrics = ", ".join(f"{k}={v}" for k, v in item.user_properties)
        _acceptance.append((marker.args[0], marker.args[1], rep.outcome, metrics))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, outcome, metrics in sorted(_acceptance, key=lambda r: int(r[0])):
        status = "PASS" if outcome == "passed" else "FAIL"
        line = f"[{status}] {number}. {title}"
        if metrics:
            line += f"  ({metrics})"
        terminalreporter.write_line(line)


@pytest.fixture
def reg3():
    return VariableRegistry([("X1", 2), ("X2", 2), ("X3", 2)])


@pytest.fixture
def p12(reg3):
    return make_factor(["X1", "X2"], [0.1, 0.2, 0.3, 0.4], reg3)


@pytest.fixture
def p23(reg3):
    return make_factor(["X2", "X3"], [0.2, 0.3, 0.25, 0.25], reg3)


def random_scope(rng, names, lo=1, hi=None):
    hi = len(names) if hi is None else min(hi, len(names))
    size = int(rng.integers(lo, hi + 1))
    return [names[i] for i in sorted(rng.choice(len(names), size=size, replace=False))]


def random_registry(rng, num_vars=4, max_card=3):
    return VariableRegistry((f"X{i + 1}", int(rng.integers(2, max_card + 1))) for i in range(num_vars))


def random_pair(rng, registry, max_scope=3):
    names = registry.names
    return (random_factor(rng, random_scope(rng, names, hi=max_scope), registry),
            random_factor(rng, random_scope(rng, names, hi=max_scope), registry))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
