import numpy as np
import pytest
from hypothesis import settings

from loglinear import scenario
from loglinear.invariant import algorithm1, no_inversion_ellipsoid

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def small():
    return scenario.load("small")


@pytest.fixture(scope="session")
def large():
    return scenario.load("large")


@pytest.fixture(scope="session")
def small_cfg(small):
    return small.controller()


@pytest.fixture(scope="session")
def small_result(small, small_cfg):
    return algorithm1(small.polytope(small_cfg))


@pytest.fixture(scope="session")
def small_noinv(small, small_cfg):
    return no_inversion_ellipsoid(small.polytope(small_cfg), cfg=small_cfg)


def pytest_configure(config):
    config.acceptance_lines = []


@pytest.fixture
def report(request):
    """Record one PASS/FAIL line for an acceptance criterion."""

    def _report(n, ok, detail):
        line = f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        request.config.acceptance_lines.append(line)
        print(line)
        return ok

    return _report


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "acceptance_lines", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split(":")[0].split()[1])):
            terminalreporter.write_line(line)
