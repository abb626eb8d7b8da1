"""Shared fixtures: one session per shipped orbit, built once per test run."""
from __future__ import annotations

import sys
from pathlib import Path

import mpmath
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from kleinmock.mockform import MockFormSession  # noqa: E402
from kleinmock.numerics import PrecisionContext  # noqa: E402

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(autouse=True)
def _precision():
    """Every test starts from mpmath's default working precision."""
    with mpmath.workdps(15):
        yield


@pytest.fixture(scope="session")
def ctx():
    return PrecisionContext(40)


@pytest.fixture(scope="session")
def s27(ctx):
    return MockFormSession.open("27.2.a.a", ctx)


@pytest.fixture(scope="session")
def s23(ctx):
    return MockFormSession.open("23.2.a.a", ctx)


@pytest.fixture(scope="session")
def s256(ctx):
    return MockFormSession.open("256.2.a.e", ctx)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
