"""
DBDP Trainer

Backward-in-time training loop: for i = N-1, ..., 0 the pair (U_i, Z_i) is
fitted by Adam on fresh batches against the frozen target U_{i+1} (the
terminal condition g at i = N-1).
"""

import logging
from dataclasses import asdict, dataclass
from typing import List, Optional, Tuple

import numpy as np
from tqdm import tqdm

from qmc_dbdp.dbdp.scheme import NetworkTarget, StepNetworks, Target, TerminalTarget, step_loss
from qmc_dbdp.dbdp.solution import TrainedSolution
from qmc_dbdp.dbdp.schedule import NetworkOptions, TrainingSchedule
from qmc_dbdp.exceptions import ContractViolation, TrainingAbortedError
from qmc_dbdp.lowdisc.samplers import BatchSampler, RQMCSampler, SamplerFactory
from qmc_dbdp.lowdisc.scramble import ScrambleMode
from qmc_dbdp.net.network import Network, NetworkSpec, project_params, xavier_init
from qmc_dbdp.net.optim import AdamState, adam_step
from qmc_dbdp.problems.base_problem import BaseProblem
from qmc_dbdp.problems.grid import TimeGrid
from qmc_dbdp.utils.seeding import STREAM_BATCH, STREAM_INIT, derive_seed

logger = logging.getLogger(__name__)


@dataclass
class StepRecord:
    """Training summary of one time step."""

    step: int
    iterations: int
    base_lr: float
    halving_period: int
    initial_loss: Optional[float]
    final_loss: Optional[float]
    init_seed: Optional[int]
    warm_started: bool

    def to_dict(self) -> dict:
        return asdict(self)


def build_step_networks(d: int, options: NetworkOptions, seed_u: int, seed_z: int) -> StepNetworks:
    """Xavier-initialized (U_i, Z_i) pair."""
    u_spec = NetworkSpec.build(d, 1, options.width, options.depth)
    z_spec = NetworkSpec.build(d, d, options.width, options.depth)
    return StepNetworks(
        Network(u_spec, xavier_init(u_spec, seed_u), options.batch_norm),
        Network(z_spec, xavier_init(z_spec, seed_z), options.batch_norm),
    )


def _apply_update(network: Network, grad: np.ndarray, state: AdamState, bound: Optional[float]):
    network.set_trainable_vector(adam_step(network.trainable_vector(), grad, state))
    if bound is not None:
        network.params = project_params(network.params, bound)


def train_step(
    problem: BaseProblem,
    grid: TimeGrid,
    i: int,
    U_next: Target,
    schedule: TrainingSchedule,
    sampler: BatchSampler,
    master_seed: int,
    options: NetworkOptions,
    warm_start: Optional[StepNetworks] = None,
    log_every: int = 500,
    progress: bool = False,
) -> Tuple[StepNetworks, StepRecord]:
    """
    Train the network pair of step i.

    Args:
        problem (BaseProblem): Problem being solved
        grid (TimeGrid): Time discretization
        i (int): Step index, 0 <= i < N
        U_next (Target): Frozen target at t_{i+1}
        schedule (TrainingSchedule): Iterations and learning rates
        sampler (BatchSampler): Source of the normal batches
        master_seed (int): Seed every stream of this run is derived from
        options (NetworkOptions): Architecture and optimizer options
        warm_start (Optional[StepNetworks]): Trained pair of step i+1 to start from
        log_every (int): Iterations between DEBUG loss lines
        progress (bool): Show a progress bar

    Returns:
        Tuple[StepNetworks, StepRecord]: Trained pair (in evaluation mode) and its summary

    Raises:
        TrainingAbortedError: On a non-finite loss or gradient
    """
    N = grid.N
    t_i, dt_i = grid.t(i), grid.dt(i)
    iterations, base_lr, halving = schedule.for_step(i, N)
    m = schedule.batch_size
    if options.batch_norm and m < 2 and iterations > 0:
        raise ContractViolation("Batch normalization needs a batch size of at least 2")

    init_seed = None
    if warm_start is not None:
        nets = warm_start.copy()
    else:
        init_seed = derive_seed(master_seed, STREAM_INIT, i)
        nets = build_step_networks(
            problem.d, options, derive_seed(master_seed, STREAM_INIT, i, 0), derive_seed(master_seed, STREAM_INIT, i, 1)
        )
    nets.train()

    state_u = AdamState(nets.u_net.trainable_count, base_lr, halving, weight_decay=options.weight_decay)
    state_z = AdamState(nets.z_net.trainable_count, base_lr, halving, weight_decay=options.weight_decay)

    logger.info(
        "Training step %d/%d (t=%.4g, dt=%.4g): %d iterations, lr %.3g halved every %d, batch %d, sampler %s",
        i, N - 1, t_i, dt_i, iterations, base_lr, halving, m, sampler.kind,
    )

    initial_loss = None
    final_loss = None
    for it in tqdm(range(iterations), desc=f"step {i}", disable=not progress, leave=False):
        normals = sampler.normals(m, 3 * problem.d, (STREAM_BATCH, i, it))
        path = problem.simulate_slice(normals, t_i, dt_i)
        try:
            result = step_loss(problem, U_next, nets, path, t_i, dt_i)
            _apply_update(nets.u_net, result.grad_u, state_u, options.param_bound)
            _apply_update(nets.z_net, result.grad_z, state_z, options.param_bound)
        except TrainingAbortedError as e:
            raise TrainingAbortedError(e.reason, step=i, iteration=it) from e

        if initial_loss is None:
            initial_loss = result.loss
        final_loss = result.loss
        if log_every and it % log_every == 0:
            logger.debug("step %d iteration %d: loss %.6e, lr %.3g", i, it, result.loss, state_u.learning_rate())

    nets.eval()
    if final_loss is not None:
        logger.info("Step %d done: loss %.6e -> %.6e", i, initial_loss, final_loss)

    record = StepRecord(
        step=i,
        iterations=iterations,
        base_lr=base_lr,
        halving_period=halving,
        initial_loss=initial_loss,
        final_loss=final_loss,
        init_seed=init_seed,
        warm_started=warm_start is not None,
    )
    return nets, record


def solve(
    problem: BaseProblem,
    grid: TimeGrid,
    schedule: TrainingSchedule,
    sampler_kind: str,
    master_seed: int,
    options: Optional[NetworkOptions] = None,
    scramble: ScrambleMode = ScrambleMode.OWEN_NESTED,
    sampler: Optional[BatchSampler] = None,
    warm_start: bool = True,
    log_every: int = 500,
    progress: bool = False,
) -> TrainedSolution:
    """
    Run the backward DBDP loop.

    Args:
        problem (BaseProblem): Problem being solved
        grid (TimeGrid): Time discretization
        schedule (TrainingSchedule): Iterations and learning rates
        sampler_kind (str): ``mc`` or ``rqmc``
        master_seed (int): Seed every stream is derived from
        options (Optional[NetworkOptions]): Defaults to width d + 20, depth 4
        scramble (ScrambleMode): RQMC randomization
        sampler (Optional[BatchSampler]): Prebuilt sampler, overrides ``sampler_kind``
        warm_start (bool): Start step i from the trained step i+1
        log_every (int): Iterations between DEBUG loss lines
        progress (bool): Show progress bars

    Returns:
        TrainedSolution: One network pair per step, with training metadata
    """
    options = options or NetworkOptions.for_dimension(problem.d)
    if sampler is None:
        sampler = SamplerFactory().create_sampler(sampler_kind, master_seed, scramble)

    N = grid.N
    steps: List[Optional[StepNetworks]] = [None] * N
    records: List[Optional[StepRecord]] = [None] * N
    U_next: Target = TerminalTarget(problem)

    for i in range(N - 1, -1, -1):
        start = steps[i + 1] if (warm_start and i < N - 1) else None
        nets, record = train_step(
            problem, grid, i, U_next, schedule, sampler, master_seed, options,
            warm_start=start, log_every=log_every, progress=progress,
        )
        steps[i] = nets
        records[i] = record
        U_next = NetworkTarget(nets.u_net)

    metadata = {
        "sampler": sampler.kind,
        "scramble": sampler.scramble.value if isinstance(sampler, RQMCSampler) else None,
        "master_seed": int(master_seed),
        "warm_start": warm_start,
        "steps": [record.to_dict() for record in records],
    }
    return TrainedSolution(
        problem=problem,
        grid=grid,
        steps=steps,
        schedule=schedule,
        options=options,
        metadata=metadata,
    )
