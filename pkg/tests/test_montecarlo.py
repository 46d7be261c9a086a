import math

import numpy as np
import pytest

from schmittsim.analysis.montecarlo import METRICS, default_workers, monte_carlo, propagation_std
from schmittsim.errors import DomainError


def test_same_seed_same_runs():
    a = monte_carlo(runs=20, seed=3)
    b = monte_carlo(runs=20, seed=3)
    assert a.runs == b.runs
    c = monte_carlo(runs=20, seed=4)
    assert a.runs != c.runs


def test_zero_sigma_is_the_nominal_trigger():
    dist = monte_carlo(sigma=0.0, runs=5)
    assert dist.retention == 1.0
    for name, value in zip(METRICS, (350.0, 150.0, 200.0, 500.0)):
        assert dist.column(name) == pytest.approx(np.full(5, value), abs=0.01)


def test_std_needs_two_runs():
    dist = monte_carlo(sigma=0.0, runs=1)
    assert math.isnan(dist.std("i_th_high"))


@pytest.mark.parametrize("kwargs", [{"runs": 0}, {"sigma": -1.0}, {"sigma": math.inf}])
def test_invalid_arguments(kwargs):
    with pytest.raises(DomainError):
        monte_carlo(**kwargs)


def test_propagation_oracle():
    oracle = propagation_std(10.0)
    assert oracle["i_th_low"] == pytest.approx(20.0)
    assert oracle["i_th_high"] == oracle["hyst_width"] == oracle["high_level"] == pytest.approx(14.142, abs=1e-3)


def test_summary_shape():
    summary = monte_carlo(runs=10, seed=1).summary()
    assert summary["runs"] == 10
    assert set(summary["mean_pA"]) == set(METRICS)
    assert summary["seed"] == 1


def test_default_workers_is_positive():
    assert default_workers() >= 1


@pytest.mark.slow
def test_worker_count_does_not_change_results():
    serial = monte_carlo(runs=40, seed=11, workers=1)
    pooled = monte_carlo(runs=40, seed=11, workers=2)
    assert serial.runs == pooled.runs


@pytest.mark.slow
def test_mismatch_spread_matches_the_oracle():
    dist = monte_carlo(sigma=10.0, runs=500, seed=0)
    oracle = propagation_std(10.0)
    assert dist.retention == 1.0
    for name in METRICS:
        std = dist.std(name)
        assert 5.0 <= std <= 25.0
        assert std == pytest.approx(oracle[name], rel=0.2)
