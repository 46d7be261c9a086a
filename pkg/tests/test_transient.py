import math

import numpy as np
import pytest

from schmittsim.analysis.hysteresis import trigger_network
from schmittsim.analysis.step import measure_overshoot, measure_rise_time, step_response, triangle_sweep
from schmittsim.core.params import Calibration, DynamicsConfig, SchmittParams
from schmittsim.errors import IntegrationError, NotApplicable, StimulusError
from schmittsim.graph.blocks import SchmittBlockParams
from schmittsim.graph.dc import eval_dc
from schmittsim.graph.stimuli import Constant, PiecewiseConstant, PiecewiseLinear, step, triangle
from schmittsim.graph.transient import Trace, dt_bound, run_transient

BASELINE = SchmittBlockParams(SchmittParams.baseline(), Calibration())


# -------------------------
# Stimuli
# -------------------------
def test_piecewise_constant_holds_from_the_edge():
    w = step(0.0, 400.0, 1e-3)
    assert w.value(0.0) == 0.0
    assert w.value(1e-3) == 400.0
    assert w.value(2e-3) == 400.0


def test_triangle_shape():
    w = triangle(0.0, 500.0, 0.2)
    assert w.sample(np.array([0.0, 0.05, 0.1, 0.2])) == pytest.approx([0.0, 250.0, 500.0, 0.0])


@pytest.mark.parametrize("make", [
    lambda: Constant(-1.0),
    lambda: PiecewiseLinear((0.0, 1.0), (0.0,)),
    lambda: PiecewiseLinear((1.0, 0.0), (0.0, 1.0)),
    lambda: PiecewiseConstant(0.0, (1.0,), (math.nan,)),
    lambda: triangle(500.0, 0.0, 0.2),
    lambda: triangle(0.0, 500.0, 0.2, cycles=0),
])
def test_invalid_stimuli(make):
    with pytest.raises(StimulusError):
        make()


# -------------------------
# Integration guard
# -------------------------
def test_dt_bound_is_a_twentieth_of_the_fastest_tau():
    network = trigger_network(BASELINE)
    assert dt_bound(network) == pytest.approx(159e-6 / 20)


def test_dt_above_bound_is_rejected():
    network = trigger_network(BASELINE)
    bound = dt_bound(network)
    with pytest.raises(IntegrationError) as e:
        run_transient(network, {"in": Constant(0.0)}, 1e-3, 1.01 * bound)
    assert e.value.bound == pytest.approx(bound)


def test_unknown_stimulus_source():
    network = trigger_network(BASELINE)
    with pytest.raises(StimulusError):
        run_transient(network, {"nope": Constant(0.0)}, 1e-3, 1e-6)


def test_trace_grid_and_decimation():
    network = trigger_network(BASELINE)
    trace = run_transient(network, {"in": Constant(100.0)}, 1e-3, 5e-6, save_every=10)
    assert len(trace) == 21
    assert trace.dt == pytest.approx(5e-5)
    assert trace.series("iin") == pytest.approx(np.full(21, 100.0))
    assert len(trace.window(2e-4, 4e-4)) == 5


def test_held_state_stays_put():
    network = trigger_network(BASELINE)
    trace = run_transient(network, {"in": Constant(250.0)}, 5e-3, dt_bound(network))
    assert np.max(np.abs(trace.series("out"))) < 1e-6


def test_step_halving_converges():
    network = trigger_network(BASELINE)
    stim = {"in": step(0.0, 400.0, 1e-3)}
    coarse = run_transient(network, stim, 3e-3, 5e-6)
    fine = run_transient(network, stim, 3e-3, 2.5e-6)
    assert len(fine) == 2 * len(coarse) - 1
    assert np.max(np.abs(coarse.series("out") - fine.series("out")[::2])) < 0.5


def test_runs_are_deterministic():
    network = trigger_network(BASELINE)
    stim = {"in": triangle(0.0, 500.0, 0.02)}
    a = run_transient(network, stim, 0.02, dt_bound(network))
    b = run_transient(network, stim, 0.02, dt_bound(network))
    assert np.array_equal(a.series("out"), b.series("out"))


@pytest.mark.parametrize("i_from,i_to", [(0.0, 100.0), (0.0, 250.0), (0.0, 400.0), (400.0, 250.0), (400.0, 100.0)])
def test_settled_transient_matches_dc(i_from, i_to):
    network = trigger_network(BASELINE)
    trace = run_transient(network, {"in": step(i_from, i_to, 1e-3)}, 6e-3, dt_bound(network))
    before = eval_dc(network, {"in": i_from}, model="smooth")
    after = eval_dc(network, {"in": i_to}, before.states, model="smooth")
    assert trace.series("out")[-1] == pytest.approx(after["out"], abs=0.05)


# -------------------------
# Step metrics
# -------------------------
def test_default_step_response():
    trace = step_response(BASELINE)
    assert 0.05 <= measure_overshoot(trace) <= 0.15
    assert 200e-6 <= measure_rise_time(trace) <= 400e-6
    assert trace.series("out")[-1] == pytest.approx(500.0, abs=0.5)
    assert np.all(trace.series("out") >= 0.0)


def test_no_coupling_is_a_first_order_lag():
    block = SchmittBlockParams(SchmittParams.baseline(), Calibration(), DynamicsConfig(overshoot_coupling=0.0))
    trace = step_response(block)
    assert measure_overshoot(trace) == pytest.approx(0.0, abs=1e-3)
    assert measure_rise_time(trace) == pytest.approx(math.log(9) * 159e-6, rel=0.01)


def test_halving_the_time_constants_halves_the_rise_time():
    fast = SchmittBlockParams(SchmittParams.baseline(), Calibration(), DynamicsConfig(tau_fb=79.5e-6, tau_out=79.5e-6))
    slow = measure_rise_time(step_response(BASELINE))
    assert measure_rise_time(step_response(fast)) == pytest.approx(0.5 * slow, rel=0.02)
    assert measure_overshoot(step_response(fast)) == pytest.approx(measure_overshoot(step_response(BASELINE)), abs=0.01)


def test_metrics_need_a_transition():
    flat = Trace(np.linspace(0.0, 1e-3, 11), {"out": np.zeros(11)})
    with pytest.raises(NotApplicable):
        measure_overshoot(flat)
    with pytest.raises(NotApplicable):
        measure_rise_time(flat)


def test_triangle_sweep_recovers_the_loop():
    _, metrics = triangle_sweep(BASELINE)
    assert metrics.bistable
    assert metrics.i_th_high == pytest.approx(350.0, abs=10.0)
    assert metrics.i_th_low == pytest.approx(150.0, abs=10.0)
    assert 495.0 <= metrics.high_level <= 550.0
