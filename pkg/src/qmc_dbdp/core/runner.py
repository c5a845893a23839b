"""
Experiment Runner

Runs independent experiment tasks (one training-and-evaluation run each) on a
thread pool and collects their outcomes.
"""

import logging
import threading
import time
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass
from typing import Any, Callable, Dict, Hashable, Optional

from qmc_dbdp.utils.system_info import physical_core_count

logger = logging.getLogger(__name__)


@dataclass
class TaskOutcome:
    """Result or failure of one task."""

    task_id: Hashable
    status: str
    result: Any = None
    error: Optional[str] = None
    processing_time: float = 0.0

    @property
    def ok(self) -> bool:
        return self.status == "completed"


class ExperimentRunner:
    """
    Executes independent tasks with a bounded number of workers.

    Every task derives its randomness from its own identifiers, so outcomes do
    not depend on the pool size or on completion order; ``run`` returns them
    keyed by task id and callers reduce them in sorted key order.

    Args:
        workers (Optional[int]): Pool size, defaults to the number of physical cores
    """

    def __init__(self, workers: Optional[int] = None):
        self.workers = max(1, workers or physical_core_count())
        self.lock = threading.RLock()
        self.completed: Dict[Hashable, TaskOutcome] = {}

    def _execute(self, task_id: Hashable, task: Callable[[], Any]) -> TaskOutcome:
        start = time.perf_counter()
        try:
            result = task()
            outcome = TaskOutcome(task_id, "completed", result=result, processing_time=time.perf_counter() - start)
            logger.info("Task %s completed in %.1f seconds", task_id, outcome.processing_time)
        except Exception as e:
            logger.error("Error executing task %s: %s", task_id, str(e), exc_info=True)
            outcome = TaskOutcome(task_id, "failed", error=str(e), processing_time=time.perf_counter() - start)

        with self.lock:
            self.completed[task_id] = outcome
        return outcome

    def run(self, tasks: Dict[Hashable, Callable[[], Any]]) -> Dict[Hashable, TaskOutcome]:
        """
        Run every task and wait for all of them.

        Args:
            tasks (Dict[Hashable, Callable[[], Any]]): Task id -> zero-argument callable

        Returns:
            Dict[Hashable, TaskOutcome]: Outcomes keyed by task id
        """
        logger.info("Running %d tasks on %d workers", len(tasks), self.workers)
        outcomes: Dict[Hashable, TaskOutcome] = {}
        if self.workers == 1:
            for task_id, task in tasks.items():
                outcomes[task_id] = self._execute(task_id, task)
            return outcomes

        with ThreadPoolExecutor(max_workers=self.workers) as executor:
            futures = {executor.submit(self._execute, task_id, task): task_id for task_id, task in tasks.items()}
            for future in as_completed(futures):
                outcomes[futures[future]] = future.result()

        failed = sum(1 for outcome in outcomes.values() if not outcome.ok)
        if failed:
            logger.warning("%d of %d tasks failed", failed, len(tasks))
        return outcomes
