"""
Network Checkpoints

Plain-text persistence of networks.

One network is stored as three lines:

    <l_1> <l_2> ... <l_{k+1}>
    <batch-norm flag 0|1> <running-stat count>
    <values>

where the values are the flat parameters, then (with batch normalization) the
gammas, betas, running means and running variances, all written with 17
significant digits so that they read back bit-identically. A step checkpoint
holds the U network block followed by the Z network block.
"""

import logging
import os
from typing import List, Tuple

import numpy as np

from qmc_dbdp.exceptions import CheckpointError
from qmc_dbdp.net.network import Network, NetworkSpec, Parameters

logger = logging.getLogger(__name__)


def _format_values(values: np.ndarray) -> str:
    return " ".join(format(float(v), ".17g") for v in values)


def format_network(network: Network) -> List[str]:
    """Serialize a network to its three checkpoint lines."""
    spec = network.spec
    lines = [" ".join(str(n) for n in spec.layer_sizes)]
    if network.bn is None:
        lines.append("0 0")
        values = network.params.flat
    else:
        lines.append(f"1 {2 * network.bn.unit_count}")
        values = np.concatenate([network.params.flat, network.bn.affine_vector(), network.bn.running_vector()])
    lines.append(_format_values(values))
    return lines


def parse_network(lines: List[str], path: str = "<checkpoint>", first_line: int = 1) -> Network:
    """
    Rebuild a network from its three checkpoint lines.

    The network is returned in evaluation mode.

    Raises:
        CheckpointError: If the block is truncated or inconsistent
    """
    if len(lines) < 3:
        raise CheckpointError(f"{path}:{first_line}: truncated network block")
    try:
        spec = NetworkSpec(tuple(int(tok) for tok in lines[0].split()))
    except (ValueError, TypeError) as e:
        raise CheckpointError(f"{path}:{first_line}: bad layer sizes: {e}")

    try:
        bn_flag, stat_count = (int(tok) for tok in lines[1].split())
    except ValueError:
        raise CheckpointError(f"{path}:{first_line + 1}: expected '<flag> <count>'")
    if bn_flag not in (0, 1):
        raise CheckpointError(f"{path}:{first_line + 1}: batch-norm flag must be 0 or 1, got {bn_flag}")
    if bn_flag == 0 and stat_count != 0:
        raise CheckpointError(f"{path}:{first_line + 1}: running-stat count {stat_count} without batch normalization")

    try:
        values = np.array([float(tok) for tok in lines[2].split()], dtype=np.float64)
    except ValueError as e:
        raise CheckpointError(f"{path}:{first_line + 2}: bad value: {e}")

    network = Network(spec, Parameters.zeros(spec), batch_norm=bool(bn_flag))
    expected = spec.param_count
    if network.bn is not None:
        if stat_count != 2 * network.bn.unit_count:
            raise CheckpointError(f"{path}:{first_line + 1}: running-stat count {stat_count} does not match the layer sizes")
        expected += network.bn.affine_count + stat_count
    if values.shape[0] != expected:
        raise CheckpointError(f"{path}:{first_line + 2}: expected {expected} values, found {values.shape[0]}")

    network.params = Parameters(spec, values[: spec.param_count])
    if network.bn is not None:
        offset = spec.param_count
        network.bn.set_affine_vector(values[offset:offset + network.bn.affine_count])
        network.bn.set_running_vector(values[offset + network.bn.affine_count:])
    network.eval()
    return network


def save_step_checkpoint(path: str, u_net: Network, z_net: Network):
    """
    Write the (U_i, Z_i) pair of one time step.

    The file is written to a temporary name and renamed into place.
    """
    content = "\n".join(format_network(u_net) + format_network(z_net)) + "\n"
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    tmp_path = f"{path}.tmp"
    try:
        with open(tmp_path, "w", encoding="utf-8", newline="\n") as f:
            f.write(content)
        os.replace(tmp_path, path)
    except OSError as e:
        raise CheckpointError(f"Failed to write checkpoint {path}: {e}")
    logger.debug("Wrote checkpoint %s", path)


def load_step_checkpoint(path: str) -> Tuple[Network, Network]:
    """
    Read the (U_i, Z_i) pair of one time step.

    Raises:
        CheckpointError: If the file is missing or corrupt
    """
    if not os.path.exists(path):
        raise CheckpointError(f"Checkpoint not found: {path}")
    with open(path, "r", encoding="utf-8") as f:
        lines = [line.rstrip("\n") for line in f]
    if len(lines) < 6:
        raise CheckpointError(f"{path}: expected 6 lines, found {len(lines)}")
    return parse_network(lines[0:3], path, 1), parse_network(lines[3:6], path, 4)
