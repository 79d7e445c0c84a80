import time
from contextlib import contextmanager

import numpy as np
import pytest

from lossbetti.pfaffian import ACTIVATIONS, Architecture

_ACCEPTANCE = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_ACCEPTANCE] = []


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)


@pytest.fixture
def criterion(request):
    """Context manager that times a criterion and records one PASS/FAIL line."""
    lines = request.config.stash[_ACCEPTANCE]

    @contextmanager
    def run(name, budget_s):
        t0 = time.perf_counter()
        try:
            yield
        except AssertionError as exc:
            dt = time.perf_counter() - t0
            detail = str(exc).splitlines()[0] if str(exc) else "assertion failed"
            lines.append(f"FAIL  {name}  ({dt:.2f} s / {budget_s:g} s)  {detail}")
            raise
        dt = time.perf_counter() - t0
        ok = dt < budget_s
        lines.append(f"{'PASS' if ok else 'FAIL'}  {name}  ({dt:.2f} s / {budget_s:g} s)"
                     + ("" if ok else "  over runtime budget"))
        assert ok, f"{name}: {dt:.2f} s exceeds {budget_s} s"

    return run


@pytest.fixture
def tanh():
    return ACTIVATIONS["tanh"]


@pytest.fixture
def logsig():
    return ACTIVATIONS["logsig"]


@pytest.fixture
def net111():
    """1-1-1 tanh network with a linear output."""
    return Architecture(1, (1,), ACTIVATIONS["tanh"])


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)
