"""
Tests for the exception hierarchy.
"""

import pytest

from qmc_dbdp.exceptions import (
    CheckpointError,
    ConfigurationError,
    ContractViolation,
    DomainError,
    QmcDbdpError,
    TrainingAbortedError,
)


def test_configuration_error_rendering():
    assert str(ConfigurationError("bad", "c.yaml", 4)) == "c.yaml:4: bad"
    assert str(ConfigurationError("bad", "c.yaml")) == "c.yaml: bad"
    assert str(ConfigurationError("bad")) == "bad"


def test_training_aborted_carries_position():
    error = TrainingAbortedError("Non-finite gradient", step=1, iteration=7)
    assert (error.step, error.iteration, error.reason) == (1, 7, "Non-finite gradient")
    assert "step=1" in str(error)
    assert str(TrainingAbortedError("nan")) == "nan"


@pytest.mark.parametrize(
    "cls, builtin",
    [
        (ConfigurationError, ValueError),
        (DomainError, ValueError),
        (ContractViolation, ValueError),
        (TrainingAbortedError, RuntimeError),
        (CheckpointError, OSError),
    ],
)
def test_hierarchy(cls, builtin):
    assert issubclass(cls, QmcDbdpError)
    assert issubclass(cls, builtin)
