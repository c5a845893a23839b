"""
PDE Residual

Finite-difference residual of du/dt + (1/2) Tr(Sigma Sigma^T D^2 u) + M . Du
+ f(t, x, u, Sigma^T Du) for a candidate solution u.

A closed-form solution plugged into its own PDE gives a residual of order
h^2, so the residual is an oracle on the driver transcription.
"""

from typing import Callable, Optional

import numpy as np

from qmc_dbdp.exceptions import ContractViolation
from qmc_dbdp.problems.base_problem import BaseProblem

Solution = Callable[[float, np.ndarray], np.ndarray]


def pde_residual(
    problem: BaseProblem,
    t: float,
    x,
    h: float = 1e-4,
    solution: Optional[Solution] = None,
) -> float:
    """
    Central-difference PDE residual at one interior point.

    Args:
        problem (BaseProblem): Problem supplying drift, diffusion and driver
        t (float): Time, 0 < t < T
        x (array-like): Point of length d
        h (float): Difference step in t and in every coordinate
        solution (Optional[Solution]): Batch function u(t, x); defaults to the
            problem's closed form

    Returns:
        float: Residual value
    """
    u = solution or problem.exact_solution
    x = np.asarray(x, dtype=np.float64).reshape(1, -1)
    d = x.shape[1]
    if d != problem.d:
        raise ContractViolation(f"Expected a point of length {problem.d}, got {d}")
    if not h < t < problem.T - h:
        raise ContractViolation(f"Need h < t < T - h for central differences, got t={t}, h={h}")

    u0 = float(u(t, x)[0])
    u_t = (float(u(t + h, x)[0]) - float(u(t - h, x)[0])) / (2.0 * h)

    shifts = h * np.eye(d)
    u_plus = u(t, x + shifts)
    u_minus = u(t, x - shifts)
    grad = (u_plus - u_minus) / (2.0 * h)
    second = (u_plus - 2.0 * u0 + u_minus) / (h * h)

    sigma = problem.diffusion_diag(x)[0]
    drift = problem.drift(x)[0]
    z = (sigma * grad)[None, :]
    f = problem.driver(t, x, np.array([u0]), z).f[0]
    return float(u_t + 0.5 * np.sum(sigma * sigma * second) + np.dot(drift, grad) + f)
