"""
Tests for plain-text network checkpoints.
"""

import os

import numpy as np
import pytest

from qmc_dbdp.exceptions import CheckpointError
from qmc_dbdp.net.checkpoint import format_network, load_step_checkpoint, parse_network, save_step_checkpoint
from qmc_dbdp.net.network import Network, NetworkSpec, Parameters


def _network(rng, batch_norm=False) -> Network:
    spec = NetworkSpec((3, 5, 5, 1))
    network = Network(spec, Parameters(spec, rng.standard_normal(spec.param_count) / 3.0), batch_norm)
    if batch_norm:
        network.forward(rng.standard_normal((32, 3)))  # move the running statistics
    return network


@pytest.mark.parametrize("batch_norm", [False, True])
def test_format_and_parse_are_bit_exact(rng, batch_norm):
    network = _network(rng, batch_norm)
    restored = parse_network(format_network(network))
    assert restored.params == network.params
    if batch_norm:
        np.testing.assert_array_equal(restored.bn.affine_vector(), network.bn.affine_vector())
        np.testing.assert_array_equal(restored.bn.running_vector(), network.bn.running_vector())
    X = rng.standard_normal((7, 3))
    np.testing.assert_array_equal(restored.predict(X), network.predict(X))


def test_step_checkpoint_round_trip(tmp_path, rng):
    path = str(tmp_path / "step_000.ckpt")
    u, z = _network(rng), _network(rng, batch_norm=True)
    save_step_checkpoint(path, u, z)
    assert not os.path.exists(path + ".tmp")
    u2, z2 = load_step_checkpoint(path)
    assert u2.params == u.params and z2.params == z.params


def test_missing_and_corrupt_checkpoints(tmp_path, rng):
    with pytest.raises(CheckpointError):
        load_step_checkpoint(str(tmp_path / "absent.ckpt"))

    path = tmp_path / "bad.ckpt"
    path.write_text("3 5 1\n0 0\n1.0 2.0\n3 5 1\n0 0\n1.0\n", encoding="utf-8")
    with pytest.raises(CheckpointError, match="expected 26 values"):
        load_step_checkpoint(str(path))

    path.write_text("3 5 1\n0 0\n", encoding="utf-8")
    with pytest.raises(CheckpointError):
        load_step_checkpoint(str(path))


@pytest.mark.parametrize(
    "bn_line, message",
    [("2 0", "flag must be 0 or 1"), ("-1 0", "flag must be 0 or 1"), ("0 4", "without batch normalization")],
)
def test_inconsistent_batch_norm_line_is_rejected(rng, bn_line, message):
    lines = format_network(_network(rng))
    lines[1] = bn_line
    with pytest.raises(CheckpointError, match=f"<checkpoint>:2: .*{message}"):
        parse_network(lines)
