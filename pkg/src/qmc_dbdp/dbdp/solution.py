"""
Trained Solution

The per-step network pairs produced by the backward loop, and their
persistence as a directory of step checkpoints plus a YAML manifest.
"""

import logging
import os
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List

import numpy as np
import yaml

from qmc_dbdp.dbdp.schedule import NetworkOptions, TrainingSchedule
from qmc_dbdp.dbdp.scheme import StepNetworks
from qmc_dbdp.exceptions import CheckpointError, ContractViolation, QmcDbdpError
from qmc_dbdp.net.checkpoint import load_step_checkpoint, save_step_checkpoint
from qmc_dbdp.problems.base_problem import BaseProblem, ProblemSpec
from qmc_dbdp.problems.factory import ProblemFactory
from qmc_dbdp.problems.grid import TimeGrid

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.yaml"
MANIFEST_FORMAT = 1


def checkpoint_name(i: int) -> str:
    return f"step_{i:03d}.ckpt"


@dataclass
class TrainedSolution:
    """
    Output of the DBDP backward loop.

    ``steps[i]`` is the (U_i, Z_i) pair for i = 0..N-1; step N is the
    terminal condition and carries no network.
    """

    problem: BaseProblem
    grid: TimeGrid
    steps: List[StepNetworks]
    schedule: TrainingSchedule
    options: NetworkOptions
    metadata: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if len(self.steps) != self.grid.N:
            raise ContractViolation(f"Expected {self.grid.N} step networks, got {len(self.steps)}")

    def u0(self, x: np.ndarray) -> np.ndarray:
        """Approximation of u(0, x) on a batch (U_0 in evaluation mode)."""
        return self.steps[0].u_net.predict(x)[:, 0]

    def manifest(self) -> Dict[str, Any]:
        spec = self.problem.spec
        return {
            "format": MANIFEST_FORMAT,
            "problem": {
                "kind": spec.kind.value,
                "d": spec.d,
                "T": spec.T,
                "a": spec.a,
                "b": spec.b,
                "mu": spec.mu,
                "sigma": spec.sigma,
            },
            "grid": self.grid.to_list(),
            "schedule": asdict(self.schedule),
            "network": asdict(self.options),
            "training": self.metadata,
            "checkpoints": [checkpoint_name(i) for i in range(self.grid.N)],
        }

    def save(self, directory: str) -> List[str]:
        """
        Write one checkpoint per step and the manifest.

        Returns:
            List[str]: Paths of the written checkpoints
        """
        os.makedirs(directory, exist_ok=True)
        paths = []
        for i, nets in enumerate(self.steps):
            path = os.path.join(directory, checkpoint_name(i))
            save_step_checkpoint(path, nets.u_net, nets.z_net)
            paths.append(path)

        manifest_path = os.path.join(directory, MANIFEST_NAME)
        try:
            with open(manifest_path, "w", encoding="utf-8", newline="\n") as f:
                yaml.safe_dump(self.manifest(), f, default_flow_style=False, sort_keys=False)
        except OSError as e:
            raise CheckpointError(f"Failed to write manifest {manifest_path}: {e}")

        logger.info("Saved %d step checkpoints and manifest to %s", len(paths), directory)
        return paths

    @classmethod
    def load(cls, directory: str) -> "TrainedSolution":
        """
        Read a solution written by ``save``.

        Raises:
            CheckpointError: If the manifest or a checkpoint is missing or corrupt
        """
        manifest_path = os.path.join(directory, MANIFEST_NAME)
        if not os.path.exists(manifest_path):
            raise CheckpointError(f"Manifest not found: {manifest_path}")
        try:
            with open(manifest_path, "r", encoding="utf-8") as f:
                manifest = yaml.safe_load(f)
        except yaml.YAMLError as e:
            raise CheckpointError(f"Corrupt manifest {manifest_path}: {e}")

        if not isinstance(manifest, dict) or manifest.get("format") != MANIFEST_FORMAT:
            raise CheckpointError(f"{manifest_path}: unsupported manifest format")

        try:
            problem = ProblemFactory().create_problem(ProblemSpec(**manifest["problem"]))
            grid = TimeGrid(manifest["grid"])
            schedule = TrainingSchedule(**manifest["schedule"])
            options = NetworkOptions(**manifest["network"])
            names = manifest["checkpoints"]
        except (KeyError, TypeError, QmcDbdpError, ValueError) as e:
            raise CheckpointError(f"{manifest_path}: invalid manifest: {e}")

        steps = []
        for name in names:
            u_net, z_net = load_step_checkpoint(os.path.join(directory, name))
            if u_net.spec.input_dim != problem.d:
                raise CheckpointError(f"{name}: network input width {u_net.spec.input_dim} != d = {problem.d}")
            try:
                steps.append(StepNetworks(u_net, z_net))
            except ContractViolation as e:
                raise CheckpointError(f"{name}: {e}")

        try:
            solution = cls(problem, grid, steps, schedule, options, manifest.get("training") or {})
        except ContractViolation as e:
            raise CheckpointError(f"{manifest_path}: {e}")
        logger.info("Loaded %s solution with %d steps from %s", problem.kind.value, grid.N, directory)
        return solution
