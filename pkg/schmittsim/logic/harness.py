import logging
from dataclasses import dataclass

import numpy as np

from ..graph.network import Network
from ..graph.transient import Trace, dt_bound, run_transient
from .encoding import SETTLE_TAUS, Encoding, Polarity, SpikeProgram, merged_times, min_separation, render_stimulus
from .gates import INPUTS, GateKind, GateMode, make_gate, make_half_adder, truth_table

log = logging.getLogger(__name__)

# Largest drift of a settled output before the next event (pA)
HOLD_TOL = 2.0

# Recorded sample spacing of gate runs (s)
SAMPLE_SPACING = 1e-4


@dataclass(frozen=True)
class GateSample:
    event_time: float        # s
    settle_time: float       # s
    value: int | None        # None while an input has never spiked, or out of band
    current: float           # pA at settle_time
    held: bool               # stayed within HOLD_TOL until the next event / end of run


@dataclass(frozen=True)
class GateRun:
    kind: GateKind | None
    trace: Trace
    samples: tuple[GateSample, ...]

    @property
    def values(self) -> list[int | None]:
        return [s.value for s in self.samples]

    @property
    def final(self) -> int | None:
        return self.samples[-1].value if self.samples else None


def _tau_max(network: Network) -> float:
    return max(network.blocks[b].schmitt.dyn.tau_max for b in network.triggers)


def _simulate(network: Network, programs: tuple[SpikeProgram, SpikeProgram], enc: Encoding,
              t_stop: float | None, dt: float | None) -> Trace:
    tau = _tau_max(network)
    stimuli = {name: render_stimulus(p, enc, tau) for name, p in zip(INPUTS, programs)}
    if t_stop is None:
        times = merged_times(programs)
        t_stop = (times[-1] if times else 0.0) + min_separation(enc, tau) + 0.02
    if dt is None:
        dt = dt_bound(network)
    save_every = max(1, int(round(SAMPLE_SPACING / dt)))
    return run_transient(network, stimuli, t_stop, dt, save_every=save_every)


def _samples(trace: Trace, probe: str, programs: tuple[SpikeProgram, SpikeProgram],
             enc: Encoding, tau: float) -> tuple[GateSample, ...]:
    y = trace.series(probe)
    times = merged_times(programs)
    t_end = float(trace.times[-1])
    samples = []
    for i, t in enumerate(times):
        settle = t + enc.pulse_width + SETTLE_TAUS * tau
        if settle > t_end:
            log.warning("event at %.4g s does not settle before the end of the run", t)
            break
        last = i + 1 == len(times)
        until = t_end if last else times[i + 1]
        current = trace.at(probe, settle)

        window = (trace.times >= settle - 1e-12) & ((trace.times < until) | last)
        held = bool(np.all(np.abs(y[window] - current) <= HOLD_TOL))

        # undefined until every input has seen a spike
        defined = all(any(ev.time <= t for ev in p) for p in programs)
        value = enc.decode(current) if defined else None
        samples.append(GateSample(t, settle, value, current, held))
    return tuple(samples)


def run_gate(kind: GateKind | str, programs: tuple[SpikeProgram, SpikeProgram], enc: Encoding | None = None,
             t_stop: float | None = None, mode: GateMode = "calibrated", dt: float | None = None) -> GateRun:
    """Transient-simulate one gate and decode its output after every event."""
    kind = GateKind(kind)
    enc = enc or Encoding()
    network = make_gate(kind, enc, mode)
    trace = _simulate(network, programs, enc, t_stop, dt)
    samples = _samples(trace, "y", programs, enc, _tau_max(network))
    log.debug("%s gate: decoded %s", kind.value, [s.value for s in samples])
    return GateRun(kind, trace, samples)


def half_adder(programs: tuple[SpikeProgram, SpikeProgram], enc: Encoding | None = None,
               mode: GateMode = "calibrated", t_stop: float | None = None,
               dt: float | None = None) -> tuple[GateRun, GateRun]:
    """Sum and carry timelines of the shared-front-end half adder."""
    enc = enc or Encoding()
    network = make_half_adder(enc, mode)
    trace = _simulate(network, programs, enc, t_stop, dt)
    tau = _tau_max(network)
    total = GateRun(GateKind.XOR, trace, _samples(trace, "sum", programs, enc, tau))
    carry = GateRun(GateKind.AND, trace, _samples(trace, "carry", programs, enc, tau))
    return total, carry


# -------------------------
# Truth-table check
# -------------------------
@dataclass(frozen=True)
class TruthRow:
    inputs: tuple[Polarity, Polarity]
    expected: int
    decoded: int | None
    held: bool

    @property
    def ok(self) -> bool:
        return self.decoded == self.expected and self.held


def polarity_walk(start: float = 0.01, spacing: float = 0.02) -> tuple[SpikeProgram, SpikeProgram]:
    """a+, b+, b-, a-, b+: after the second spike the inputs visit
    (+,+), (+,-), (-,-), (-,+)."""
    t = [start + i * spacing for i in range(5)]
    a = SpikeProgram.of((t[0], "+"), (t[3], "-"))
    b = SpikeProgram.of((t[1], "+"), (t[2], "-"), (t[4], "+"))
    return a, b


def last_polarities(programs: tuple[SpikeProgram, SpikeProgram], t: float) -> tuple[Polarity | None, ...]:
    out = []
    for p in programs:
        seen = [ev for ev in p if ev.time <= t]
        out.append(seen[-1].polarity if seen else None)
    return tuple(out)


def check_truth_table(kind: GateKind | str, enc: Encoding | None = None, mode: GateMode = "calibrated",
                      rest: float = 0.0, programs: tuple[SpikeProgram, SpikeProgram] | None = None,
                      ) -> tuple[GateRun, list[TruthRow]]:
    """Run ``programs`` (the polarity walk by default) through one gate and
    compare each settled decode with the Boolean table.

    ``rest`` extends the run after the last spike.
    """
    kind = GateKind(kind)
    enc = enc or Encoding()
    programs = programs or polarity_walk()
    network = make_gate(kind, enc, mode)
    tau = _tau_max(network)
    times = merged_times(programs)
    t_stop = times[-1] + min_separation(enc, tau) + 0.02 + rest
    run = run_gate(kind, programs, enc, t_stop=t_stop, mode=mode)

    table = truth_table(kind)
    rows = []
    for s in run.samples:
        inputs = last_polarities(programs, s.event_time)
        if None in inputs:
            continue
        rows.append(TruthRow(inputs, table[inputs], s.value, s.held))
    return run, rows
