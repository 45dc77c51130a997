from __future__ import annotations

import pytest

from unitgaps.gap_engine import ConvexRegion
from unitgaps.numberfield import NumberField
from unitgaps.quasi_analyzer import build_flow
from unitgaps.unit_flow import label_set, solve_rates

ACCEPTANCE_LINES: list[str] = []

CUBIC_MINPOLY = [1, -7, 14, -7]
CUBIC_OMEGA = [[1, 0], [1, 0, 0]]
CUBIC_UNITS = [(2, -4, 1), (-5, 5, -1)]
LOG_GRID = [10, 17, 31, 56, 100, 177, 316, 562, 1000]


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def cubic():
    return NumberField(CUBIC_MINPOLY, CUBIC_OMEGA)


@pytest.fixture(scope="session")
def cubic_units(cubic):
    return solve_rates(cubic, [cubic.element(u) for u in CUBIC_UNITS])


@pytest.fixture(scope="session")
def cubic_flow(cubic_units):
    return build_flow(cubic_units)


@pytest.fixture(scope="session")
def unit_square():
    return ConvexRegion.unit_box(2)


@pytest.fixture(scope="session")
def cubic_simplex(cubic):
    return ConvexRegion.simplex(cubic)


@pytest.fixture(scope="session")
def golden():
    return NumberField([1, -1, -1], [[1, -1]], ["0.618034"])


@pytest.fixture(scope="session")
def golden_units(golden):
    return solve_rates(golden, [golden.element(1, 1)])


@pytest.fixture(scope="session")
def square_labels(cubic, cubic_units, unit_square):
    """Labels for the unit square accumulated over the log grid plus the scales used in tests."""
    ts = sorted(set(LOG_GRID) | {20, 50, 200})
    return label_set(cubic, cubic_units, unit_square, ts)
