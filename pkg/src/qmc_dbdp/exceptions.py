"""
Exceptions

Exception hierarchy shared by every qmc-dbdp package.
"""

from typing import Optional


class QmcDbdpError(Exception):
    """Base class for all qmc-dbdp errors."""


class ConfigurationError(QmcDbdpError, ValueError):
    """
    Invalid configuration value, unknown key, or unsupported setting.

    When the problem can be traced to a file, the message is rendered as
    ``<path>:<line>: <message>``.
    """

    def __init__(self, message: str, path: Optional[str] = None, line: Optional[int] = None):
        self.message = message
        self.path = path
        self.line = line
        super().__init__(self._render())

    def _render(self) -> str:
        if self.path and self.line:
            return f"{self.path}:{self.line}: {self.message}"
        if self.path:
            return f"{self.path}: {self.message}"
        return self.message


class DomainError(QmcDbdpError, ValueError):
    """Argument outside the mathematical domain of a function."""


class ContractViolation(QmcDbdpError, ValueError):
    """Shape mismatch, stale cache or another broken call contract."""


class TrainingAbortedError(QmcDbdpError, RuntimeError):
    """
    Non-finite loss or gradient during training.

    Args:
        message (str): Diagnostic message
        step (Optional[int]): Time step being trained
        iteration (Optional[int]): Optimizer iteration at which training stopped
    """

    def __init__(self, message: str, step: Optional[int] = None, iteration: Optional[int] = None):
        self.reason = message
        self.step = step
        self.iteration = iteration
        if step is not None or iteration is not None:
            message = f"{message} (step={step}, iteration={iteration})"
        super().__init__(message)


class CheckpointError(QmcDbdpError, OSError):
    """Missing or corrupt checkpoint or manifest."""
