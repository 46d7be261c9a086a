import logging

import numpy as np

from ..errors import NotApplicable
from ..graph.blocks import SchmittBlockParams
from ..graph.stimuli import step, triangle
from ..graph.transient import Trace, dt_bound, run_transient
from .hysteresis import HysteresisMetrics, trigger_network

log = logging.getLogger(__name__)


# Slowest-ramp triangle used for the transient hysteresis loop (s)
TRIANGLE_PERIOD = 0.2


def _pick(trace: Trace, probe: str | None) -> np.ndarray:
    if probe is None:
        probe = "out" if "out" in trace.probes else next(iter(trace.probes), None)
    if probe is None or probe not in trace.probes:
        raise NotApplicable(f"trace has no probe {probe!r}")
    return np.asarray(trace.probes[probe], dtype=float)


def _crossing_time(times: np.ndarray, y: np.ndarray, level: float, start: int = 0) -> float | None:
    above = np.nonzero(y[start:] >= level)[0]
    if len(above) == 0:
        return None
    i = start + int(above[0])
    if i == 0 or y[i] == y[i - 1]:
        return float(times[i])
    frac = (level - y[i - 1]) / (y[i] - y[i - 1])
    return float(times[i - 1] + frac * (times[i] - times[i - 1]))


def step_response(block: SchmittBlockParams, i_from: float = 0.0, i_to: float | None = None,
                  t_step: float = 1e-3, t_stop: float = 5e-3, dt: float | None = None) -> Trace:
    """Output of a lone trigger for an input step at ``t_step``.

    ``i_to`` defaults to 50 pA above the upper threshold.
    """
    op = block.op
    if i_to is None:
        i_to = op.i_th_high + 50.0
    network = trigger_network(block)
    if dt is None:
        dt = 0.5 * dt_bound(network)
    return run_transient(network, {"in": step(i_from, i_to, t_step)}, t_stop, dt)


def measure_overshoot(trace: Trace, settled: float | None = None, probe: str | None = None) -> float:
    """Fractional overshoot of the first LOW→HIGH transition above ``settled``.

    ``settled`` defaults to the last sample.
    """
    y = _pick(trace, probe)
    if settled is None:
        settled = float(y[-1])
    if settled <= 0:
        raise NotApplicable("settled level is not positive")
    half = 0.5 * settled
    if y[0] >= half:
        raise NotApplicable("trace starts above half of the settled level")
    crossing = np.nonzero(y >= half)[0]
    if len(crossing) == 0:
        raise NotApplicable("no LOW to HIGH transition in trace")
    peak = float(np.max(y[int(crossing[0]):]))
    return max(0.0, (peak - settled) / settled)


def measure_rise_time(trace: Trace, probe: str | None = None, low: float = 0.1, high: float = 0.9,
                      settle_tol: float = 0.02) -> float:
    """10%→90% rise time (s) from the first sample to the final level."""
    y = _pick(trace, probe)
    times = trace.times
    base, final = float(y[0]), float(y[-1])
    span = final - base
    if span <= 1e-9:
        raise NotApplicable("no rising transition in trace")
    tail = y[-max(2, len(y) // 10):]
    if np.max(np.abs(tail - final)) > settle_tol * span:
        raise NotApplicable("transition has not settled by the end of the trace")

    t_low = _crossing_time(times, y, base + low * span)
    t_high = _crossing_time(times, y, base + high * span)
    if t_low is None or t_high is None:
        raise NotApplicable("transition incomplete")
    return t_high - t_low


def triangle_sweep(block: SchmittBlockParams, lo: float = 0.0, hi: float = 500.0,
                   period: float = TRIANGLE_PERIOD, dt: float | None = None) -> tuple[Trace, HysteresisMetrics]:
    """Drive a lone trigger with one lo→hi→lo triangle and read the switching
    currents off the transient."""
    network = trigger_network(block)
    if dt is None:
        dt = dt_bound(network)
    save_every = max(1, int(round(period / 20000 / dt)))
    trace = run_transient(network, {"in": triangle(lo, hi, period)}, period, dt, save_every=save_every)

    y = trace.probes["out"]
    u = trace.probes["iin"]
    high = block.op.high_level
    level = 0.5 * high
    apex = int(np.argmax(u))

    rising = np.nonzero(y[: apex + 1] > level)[0]
    falling = np.nonzero(y[apex:] <= level)[0]
    if len(rising) == 0 or len(falling) == 0:
        log.info("triangle sweep %.0f..%.0f pA did not switch both ways", lo, hi)
        return trace, HysteresisMetrics.unset(float(np.max(y)))

    up = float(u[int(rising[0])])
    down = float(u[apex + int(falling[0])])
    width = up - down
    return trace, HysteresisMetrics(up, down, width, float(np.max(y)), width > 0)
