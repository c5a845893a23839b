"""
Tests for CSV result files.
"""

import math

import numpy as np
import pytest

from qmc_dbdp.core.config import validate_config
from qmc_dbdp.evaluation.metrics import pointwise_histogram
from qmc_dbdp.evaluation.rates import RateProbeResult
from qmc_dbdp.evaluation.reporting import (
    config_provenance,
    fingerprint,
    histogram_name,
    provenance,
    write_histogram,
    write_rate_probe,
    write_suite_outputs,
)
from qmc_dbdp.evaluation.suite import CellResult, RunResult, SuiteResult


def _lines(path):
    with open(path, "r", encoding="utf-8") as f:
        return f.read().split("\n")[:-1]


def _run(run, value):
    return RunResult(run, 0, value, 0.0, [0.1], np.array([value, -value, 1.0]))


def _suite():
    mc = CellResult("heat", 2, 2, 64, "mc", 2, runs=[_run(0, 0.01), _run(1, 0.03)])
    rqmc = CellResult("heat", 2, 2, 64, "rqmc", 2, runs=[_run(0, 0.01)], failures={1: "diverged"})
    return SuiteResult("heat", [mc, rqmc])


def test_fingerprint_is_canonical():
    assert fingerprint({"a": 1, "b": [1, 2]}) == fingerprint({"b": [1, 2], "a": 1})
    assert fingerprint({"a": 1}) != fingerprint({"a": 2})
    assert len(fingerprint({})) == 64


def test_provenance_flattens_settings():
    lines = provenance({"solution": {"grid": [0.0, 1.0], "seed": None}, "steps": [{"loss": 0.5}]}, ["note,1"])
    assert lines[0].startswith("# config_fingerprint,")
    assert lines[1] == "# note,1"
    assert "# config,solution.grid,0.0 1.0" in lines
    assert "# config,solution.seed,null" in lines
    assert "# config,steps.0.loss,0.5" in lines


def test_config_provenance_is_resolved(tiny_config_dict):
    lines = config_provenance(validate_config(tiny_config_dict))
    assert "# config,network.width,6" in lines
    assert "# config,problem.mu,0.1" in lines
    assert not any("long-running" in line for line in lines)


def test_suite_outputs(tmp_path, tiny_config_dict):
    config = validate_config(tiny_config_dict)
    written = write_suite_outputs(str(tmp_path), _suite(), config)
    lines = _lines(written["table"])
    assert "# incomplete,heat,2,64,rqmc,1/2" in lines
    assert not any(line.startswith("# variance_reduction") for line in lines)
    data = [line for line in lines if not line.startswith("#")]
    assert data[0] == "problem,d,N,m,sampler,n_runs,mean_rel_l2,std_rel_l2"
    row = data[1].split(",")
    assert row[:6] == ["heat", "2", "2", "64", "mc", "2"]
    assert float(row[6]) == pytest.approx(0.02)
    assert data[2] == "heat,2,2,64,rqmc,1,0.01,0.0"

    best = tmp_path / histogram_name(_suite().cells[0], "best")
    assert best.name == "histogram_heat_d2_m64_mc_best.csv"
    assert str(best) in written.values()
    assert _lines(str(best))[-1] == "out_of_range,1"


def test_histogram_csv(tmp_path):
    path = str(tmp_path / "h.csv")
    write_histogram(path, pointwise_histogram(np.array([0.0, 0.05, 0.5]), (-0.1, 0.1), 4), ["# x"])
    lines = _lines(path)
    assert lines[0] == "# x"
    assert lines[1] == "bin_left,bin_right,density"
    assert len(lines) == 2 + 4 + 1
    assert lines[-1] == "out_of_range,1"
    mass = sum((float(r.split(",")[1]) - float(r.split(",")[0])) * float(r.split(",")[2]) for r in lines[2:6])
    assert math.isclose(mass + 1 / 3, 1.0, abs_tol=1e-12)


def test_rate_probe_csv(tmp_path):
    results = {
        "mc": RateProbeResult("mc", [16, 32, 64], [0.4, 0.28, 0.2], -0.5, 1.0, 4),
        "rqmc": RateProbeResult("rqmc", [16, 32, 64], [0.0, 0.0, 0.0], None, 1.0, 4),
    }
    path = str(tmp_path / "rates.csv")
    write_rate_probe(path, results, ["# header"])
    lines = _lines(path)
    assert "# fitted_slope,mc,-0.5" in lines
    assert "# fitted_slope,rqmc,degenerate" in lines
    assert any(line.startswith("# quantity,") for line in lines)
    data = [line for line in lines if not line.startswith("#")]
    assert data[0] == "sampler,m,rmse"
    assert data[1:] == ["mc,16,0.4", "mc,32,0.28", "mc,64,0.2", "rqmc,16,0.0", "rqmc,32,0.0", "rqmc,64,0.0"]
