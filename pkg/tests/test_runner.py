"""
Tests for the experiment runner.
"""

import pytest

from qmc_dbdp.core.runner import ExperimentRunner


@pytest.mark.parametrize("workers", [1, 3])
def test_outcomes_are_keyed_by_task(workers):
    runner = ExperimentRunner(workers)
    outcomes = runner.run({("a", i): (lambda i=i: i * i) for i in range(6)})
    assert sorted(outcomes) == [("a", i) for i in range(6)]
    assert all(outcome.ok for outcome in outcomes.values())
    assert [outcomes[("a", i)].result for i in range(6)] == [0, 1, 4, 9, 16, 25]
    assert len(runner.completed) == 6


def test_failures_are_recorded():
    def boom():
        raise ValueError("bad run")

    outcomes = ExperimentRunner(2).run({"good": lambda: 1, "bad": boom})
    assert outcomes["good"].ok
    assert not outcomes["bad"].ok
    assert outcomes["bad"].status == "failed"
    assert outcomes["bad"].error == "bad run"


def test_default_pool_size_is_positive():
    assert ExperimentRunner().workers >= 1
    assert ExperimentRunner(0).workers >= 1
