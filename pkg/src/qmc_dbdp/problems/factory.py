"""
Problem Factory

Factory for creating problem instances based on problem kind.
"""

import logging
from typing import Dict, Type

from qmc_dbdp.exceptions import ConfigurationError
from qmc_dbdp.problems.base_problem import BaseProblem, ProblemKind, ProblemSpec
from qmc_dbdp.problems.black_scholes import BlackScholesCdfProblem, BlackScholesCosProblem
from qmc_dbdp.problems.heat import HeatProblem
from qmc_dbdp.problems.hjb import HJBProblem

logger = logging.getLogger(__name__)


class ProblemFactory:
    """
    Factory for creating problem instances based on problem kind.
    """

    def __init__(self):
        self.problem_classes: Dict[str, Type[BaseProblem]] = {
            ProblemKind.HEAT.value: HeatProblem,
            ProblemKind.HJB.value: HJBProblem,
            ProblemKind.BS1.value: BlackScholesCosProblem,
            ProblemKind.BS2.value: BlackScholesCdfProblem,
        }

    def create_problem(self, spec: ProblemSpec) -> BaseProblem:
        """
        Create a problem instance from its spec.

        Args:
            spec (ProblemSpec): Problem instance description

        Returns:
            BaseProblem: Problem instance

        Raises:
            ConfigurationError: If the kind is unknown
        """
        problem_class = self.problem_classes.get(ProblemKind(spec.kind).value)
        if not problem_class:
            raise ConfigurationError(f"Unknown problem kind: {spec.kind} (supported: {', '.join(self.get_supported_kinds())})")
        return problem_class(spec)

    def get_supported_kinds(self) -> list:
        return list(self.problem_classes.keys())


def create_problem(kind: str, d: int, **coefficients) -> BaseProblem:
    """Shortcut: build a spec with defaults and instantiate it."""
    try:
        spec = ProblemSpec.create(kind, d, **coefficients)
    except ValueError as e:
        raise ConfigurationError(f"Invalid problem settings: {e}")
    return ProblemFactory().create_problem(spec)
