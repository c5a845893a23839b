"""
Shared fixtures for the qmc-dbdp test suite.
"""

import logging
import os

import numpy as np
import pytest
import yaml

from qmc_dbdp.dbdp.schedule import NetworkOptions, TrainingSchedule
from qmc_dbdp.problems.factory import create_problem
from qmc_dbdp.problems.grid import TimeGrid


@pytest.fixture(autouse=True)
def _quiet_logging():
    logging.getLogger("qmc_dbdp").setLevel(logging.WARNING)
    yield


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def heat2():
    return create_problem("heat", 2)


@pytest.fixture
def tiny_schedule():
    return TrainingSchedule(
        iterations_first=30,
        iterations_rest=20,
        lr_first=0.01,
        lr_rest=0.001,
        halve_every_first=10,
        halve_every_rest=10,
        batch_size=64,
    )


@pytest.fixture
def tiny_options():
    return NetworkOptions(width=6, depth=3)


@pytest.fixture
def grid2():
    return TimeGrid.uniform(1.0, 2)


@pytest.fixture
def write_config(tmp_path):
    """Write a YAML config (dict or raw text) and return its path."""

    def _write(content, name="config.yaml"):
        path = os.path.join(str(tmp_path), name)
        with open(path, "w", encoding="utf-8") as f:
            if isinstance(content, str):
                f.write(content)
            else:
                yaml.safe_dump(content, f, sort_keys=False)
        return path

    return _write


@pytest.fixture
def tiny_config_dict(tmp_path):
    return {
        "problem": {"kind": "heat", "d": 2, "N": 2},
        "sampler": {"kind": "rqmc"},
        "network": {"width": 6, "depth": 3},
        "training": {
            "batch_size": 256,
            "iterations_first": 200,
            "iterations_rest": 100,
            "halve_every_first": 100,
            "halve_every_rest": 50,
            "log_every": 0,
        },
        "evaluation": {"m_eval": 1024},
        "rate_probe": {"m_list": [64, 128, 256], "replications": 4, "oracle_m": 4096, "genz_dimension": 3, "d": 2},
        "experiment": {"master_seed": 7, "n_runs": 1, "output_dir": str(tmp_path / "out"), "workers": 1},
    }
