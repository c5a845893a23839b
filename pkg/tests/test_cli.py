"""
Tests for the command-line interface.
"""

import filecmp
import os

import pytest

from qmc_dbdp.cli import main
from qmc_dbdp.dbdp.solution import MANIFEST_NAME, checkpoint_name


def _read(path):
    with open(path, "r", encoding="utf-8") as f:
        return f.read().split("\n")[:-1]


def _data(path):
    return [line for line in _read(path) if not line.startswith("#")]


def test_missing_config_is_a_usage_error(tmp_path):
    assert main(["solve", "--config", str(tmp_path / "absent.yaml")]) == 2


def test_invalid_config_is_a_usage_error(write_config):
    assert main(["solve", "--config", write_config("problem:\n  d: 0\n")]) == 2


def test_unknown_table_is_rejected_by_the_parser():
    with pytest.raises(SystemExit) as info:
        main(["reproduce-table", "table9"])
    assert info.value.code == 2


def test_solve_then_evaluate(tmp_path, write_config, tiny_config_dict, capsys):
    path = write_config(tiny_config_dict)
    assert main(["solve", "--config", path, "--log-level", "WARNING"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert [line.split(":")[0] for line in out] == ["step 0", "step 1"]

    solution_dir = tmp_path / "out" / "solution"
    for name in (checkpoint_name(0), checkpoint_name(1), MANIFEST_NAME, "config.yaml"):
        assert (solution_dir / name).exists()

    assert main(["evaluate", str(solution_dir), "--m-eval", "1024", "--log-level", "WARNING"]) == 0
    report = _data(str(solution_dir / "error_report.csv"))
    assert report[0] == "relative_l2,stderr,reference_stderr,m_eval,out_of_range_count"
    assert report[1].split(",")[3] == "1024"
    histogram = _read(str(solution_dir / "histogram.csv"))
    assert histogram[0].startswith("# config_fingerprint,")
    assert histogram[-1].startswith("out_of_range,")
    assert len(_data(str(solution_dir / "histogram.csv"))) == 1 + 50 + 1


def test_evaluate_rejects_a_bad_size(tmp_path):
    assert main(["evaluate", str(tmp_path), "--m-eval", "0"]) == 2
    assert main(["evaluate", str(tmp_path / "missing")]) == 1


def test_solve_is_byte_deterministic(tmp_path, write_config, tiny_config_dict):
    path = write_config(tiny_config_dict)
    dirs = []
    for name in ("a", "b"):
        out = str(tmp_path / name)
        assert main(["solve", "--config", path, "--out", out, "--log-level", "ERROR"]) == 0
        assert main(["evaluate", os.path.join(out, "solution"), "--m-eval", "512", "--log-level", "ERROR"]) == 0
        dirs.append(os.path.join(out, "solution"))
    # the effective config records the output directory
    names = sorted(n for n in os.listdir(dirs[0]) if n != "config.yaml")
    assert "error_report.csv" in names
    match, mismatch, errors = filecmp.cmpfiles(dirs[0], dirs[1], names, shallow=False)
    assert mismatch == [] and errors == []


def test_rate_probe_constant_mode(tmp_path, write_config, tiny_config_dict, capsys):
    path = write_config(tiny_config_dict)
    assert main(["rate-probe", "--config", path, "--mode", "constant", "--log-level", "ERROR"]) == 0
    assert "degenerate" in capsys.readouterr().out
    csv_path = tmp_path / "out" / "rate_probe_constant.csv"
    lines = _read(str(csv_path))
    assert "# fitted_slope,mc,degenerate" in lines
    assert "# config,rate_probe.mode,constant" in lines
    assert len(_data(str(csv_path))) == 1 + 2 * 3


def test_rate_probe_network_mode(tmp_path, write_config, tiny_config_dict, capsys):
    path = write_config(tiny_config_dict)
    assert main(["rate-probe", "--config", path, "--seed", "5", "--log-level", "ERROR"]) == 0
    out = capsys.readouterr().out
    assert "mc: fitted slope" in out and "rqmc: fitted slope" in out
    lines = _read(str(tmp_path / "out" / "rate_probe_network.csv"))
    assert "# config,experiment.master_seed,5" in lines


def test_evaluate_defaults_to_the_training_seed(tmp_path, write_config, tiny_config_dict):
    path = write_config(tiny_config_dict)
    assert main(["solve", "--config", path, "--log-level", "ERROR"]) == 0
    solution_dir = str(tmp_path / "out" / "solution")
    implicit, explicit = str(tmp_path / "implicit"), str(tmp_path / "explicit")
    common = ["evaluate", solution_dir, "--m-eval", "256", "--log-level", "ERROR"]
    assert main(common + ["--out", implicit]) == 0
    assert main(common + ["--out", explicit, "--seed", "7"]) == 0

    report = _read(os.path.join(implicit, "error_report.csv"))
    assert "# config,evaluation.seed,7" in report
    assert report == _read(os.path.join(explicit, "error_report.csv"))
