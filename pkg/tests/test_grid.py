"""
Tests for time grids.
"""

import pytest

from qmc_dbdp.exceptions import ContractViolation
from qmc_dbdp.problems.grid import TimeGrid


def test_uniform_grid():
    grid = TimeGrid.uniform(1.0, 4)
    assert grid.N == 4
    assert grid.T == 1.0
    assert grid.to_list() == [0.0, 0.25, 0.5, 0.75, 1.0]
    assert grid.dt(3) == 0.25
    assert grid.mesh == 0.25


def test_last_node_is_exactly_T():
    grid = TimeGrid.uniform(0.3, 7)
    assert grid.t(grid.N) == 0.3


def test_non_uniform_grid():
    grid = TimeGrid([0.0, 0.1, 0.5, 1.0])
    assert grid.mesh == 0.5
    assert grid == TimeGrid([0.0, 0.1, 0.5, 1.0])
    assert grid != TimeGrid.uniform(1.0, 3)


@pytest.mark.parametrize("nodes", [[0.0], [0.1, 1.0], [0.0, 0.5, 0.5], [0.0, 1.0, 0.5]])
def test_invalid_grids(nodes):
    with pytest.raises(ContractViolation):
        TimeGrid(nodes)


def test_step_index_is_checked():
    grid = TimeGrid.uniform(1.0, 2)
    with pytest.raises(ContractViolation):
        grid.dt(2)
    with pytest.raises(ContractViolation):
        TimeGrid.uniform(1.0, 0)
