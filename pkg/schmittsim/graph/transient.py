import logging
import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from ..core.device import Branch, SchmittState
from ..errors import IntegrationError, StimulusError
from .dc import eval_dc, initial_states
from .kernel import BlockTable, integrate_chunk, record_now
from .network import Network
from .stimuli import Constant, Waveform

log = logging.getLogger(__name__)

# Largest dt as a fraction of the fastest trigger time constant
DT_FRACTION = 1.0 / 20.0

CHUNK_STEPS = 1 << 16

# Run length and recording caps
MAX_STEPS = 20_000_000
MAX_SAMPLES = 5_000_000


@dataclass(frozen=True)
class Trace:
    times: np.ndarray                       # s, uniform
    probes: dict[str, np.ndarray]           # pA, one series per probe
    final: dict[str, SchmittState] = field(default_factory=dict)

    @property
    def dt(self) -> float:
        if len(self.times) < 2:
            return 0.0
        return float(self.times[1] - self.times[0])

    def series(self, probe: str) -> np.ndarray:
        return self.probes[probe]

    def window(self, t0: float, t1: float) -> "Trace":
        mask = (self.times >= t0 - 1e-12) & (self.times <= t1 + 1e-12)
        return Trace(self.times[mask], {k: v[mask] for k, v in self.probes.items()}, self.final)

    def at(self, probe: str, t: float) -> float:
        i = int(np.argmin(np.abs(self.times - t)))
        return float(self.probes[probe][i])

    def __len__(self):
        return len(self.times)


def dt_bound(network: Network) -> float:
    taus = [network.blocks[b].schmitt.dyn.tau_min for b in network.triggers]
    return min(taus) * DT_FRACTION if taus else math.inf


def _source_columns(waveforms: list[Waveform], times: np.ndarray, dt: float):
    n = len(times)
    n_src = len(waveforms)
    u_start = np.empty((n_src, n))
    u_mid = np.empty((n_src, n))
    u_end = np.empty((n_src, n))
    for j, w in enumerate(waveforms):
        start = w.sample(times)
        u_start[j] = start
        if w.held:
            u_mid[j] = start
            u_end[j] = start
        else:
            u_mid[j] = w.sample(times + 0.5 * dt)
            u_end[j] = w.sample(times + dt)
    return u_start, u_mid, u_end


def run_transient(network: Network, stimuli: Mapping[str, Waveform], t_stop: float, dt: float,
                  initial: Mapping[str, SchmittState] | None = None, save_every: int = 1,
                  t_start: float = 0.0) -> Trace:
    """Integrate every trigger of ``network`` from ``t_start`` to ``t_start + t_stop``.

    Sources without a stimulus carry 0 pA. With ``initial`` omitted, each
    trigger starts on the equilibrium continuous with LOW for the initial
    source currents.
    """
    if not (t_stop > 0 and math.isfinite(t_stop)):
        raise IntegrationError(f"t_stop must be positive, got {t_stop}", dt_bound(network))
    bound = dt_bound(network)
    if not (dt > 0) or dt > bound * (1 + 1e-12):
        raise IntegrationError(f"dt={dt:.4g} s exceeds the stability bound {bound:.4g} s", bound)
    if save_every < 1:
        raise IntegrationError("save_every must be at least 1", bound)

    unknown = sorted(set(stimuli) - set(network.sources))
    if unknown:
        raise StimulusError(f"stimulus for unknown source(s): {', '.join(unknown)}")

    waveforms = [stimuli.get(s, Constant(0.0)) for s in network.sources]
    for s in network.sources:
        if s not in stimuli:
            log.debug("source %s has no stimulus, holding 0 pA", s)

    table = BlockTable(network)
    n = len(table.order)
    n_steps = max(1, int(round(t_stop / dt)))
    n_saved = n_steps // save_every + 1
    if n_steps > MAX_STEPS:
        raise IntegrationError(f"{n_steps} steps exceed the limit of {MAX_STEPS}", bound)
    if n_saved > MAX_SAMPLES:
        raise IntegrationError(
            f"{n_saved} recorded samples exceed the limit of {MAX_SAMPLES}, raise save_every", bound
        )

    # -------------------------
    # Initial state
    # -------------------------
    t0_values = {s: w.value(t_start) for s, w in zip(network.sources, waveforms)}
    start = dict(initial_states(network))
    if initial:
        start.update(initial)
    else:
        start = eval_dc(network, t0_values, start, model="smooth").states

    fb = np.zeros(n)
    out = np.zeros(n)
    for bid in network.triggers:
        i = table.pos[bid]
        fb[i] = start[bid].i_fb
        out[i] = start[bid].i_out

    probe_ids = network.probes
    probe_pos = np.asarray([table.pos[p] for p in probe_ids], dtype=np.int64)
    rec = np.zeros((len(probe_ids), n_saved))

    u0 = np.asarray([t0_values[s] for s in network.sources], dtype=np.float64)
    record_now(table.kind, table.src_slot, table.drv_ptr, table.drv_idx, table.param,
               fb, out, u0, probe_pos, rec, 0)

    # -------------------------
    # Integrate in chunks
    # -------------------------
    done = 0
    while done < n_steps:
        m = min(CHUNK_STEPS, n_steps - done)
        times = t_start + dt * np.arange(done, done + m + 1)
        u_start, u_mid, u_end = _source_columns(waveforms, times, dt)
        integrate_chunk(table.kind, table.src_slot, table.drv_ptr, table.drv_idx, table.param,
                        fb, out, u_start, u_mid, u_end, dt, done, save_every, probe_pos, rec)
        done += m

    log.debug("transient: %d steps of %.3g s, %d probes", n_steps, dt, len(probe_ids))

    final = {}
    for bid in network.triggers:
        i = table.pos[bid]
        op = network.blocks[bid].schmitt.op
        branch = Branch.HIGH if out[i] >= 0.5 * op.high_level else Branch.LOW
        final[bid] = SchmittState(branch, float(fb[i]), float(out[i]))

    times = t_start + dt * save_every * np.arange(n_saved)
    return Trace(times, {p: rec[j] for j, p in enumerate(probe_ids)}, final)
