import numpy as np
import pytest

from shapecomp.dictionary import Dictionary
from shapecomp.grid import Grid, ShapeMask
from shapecomp.imaging import DeltaField


def make_inst_a():
    """Four cells in a row, S0 = {0,1,2}, S1 = {1,2,3}, delta = (-1, 1, 1, 1)."""
    grid = Grid((1, 4))
    shapes = (ShapeMask.from_cells(grid, [0, 1, 2]), ShapeMask.from_cells(grid, [1, 2, 3]))
    return Dictionary(grid, shapes), DeltaField(grid, np.array([-1.0, 1.0, 1.0, 1.0]))


@pytest.fixture
def inst_a():
    return make_inst_a()


def pytest_terminal_summary(terminalreporter):
    from acceptance_log import lines

    rows = lines()
    if rows:
        terminalreporter.write_sep("=", "acceptance criteria")
        for row in rows:
            terminalreporter.write_line(row)
