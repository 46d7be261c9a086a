import logging
import math
from dataclasses import asdict, dataclass, replace
from typing import Mapping

import numpy as np

from ..core.device import SchmittState
from ..core.params import Calibration, DynamicsConfig, SchmittParams
from ..errors import DomainError, NetworkError
from ..graph.blocks import Block, BlockKind, Net, SchmittBlockParams
from ..graph.dc import Model, eval_dc, initial_states
from ..graph.network import Network, build_network

log = logging.getLogger(__name__)

# Default bisection tolerance on switching points (pA)
SWITCH_TOL = 1e-3

# Largest DC sweep grid
MAX_SWEEP_STEPS = 100_000


@dataclass(frozen=True)
class HysteresisMetrics:
    i_th_high: float | None
    i_th_low: float | None
    hyst_width: float | None
    high_level: float | None
    bistable: bool

    @classmethod
    def unset(cls, high_level: float | None = None) -> "HysteresisMetrics":
        return cls(None, None, None, high_level, False)

    def as_dict(self) -> dict:
        d = asdict(self)
        return {
            "i_th_high_pA": d["i_th_high"],
            "i_th_low_pA": d["i_th_low"],
            "hyst_width_pA": d["hyst_width"],
            "high_level_pA": d["high_level"],
            "bistable": d["bistable"],
        }


def trigger_network(block: SchmittBlockParams, inverted: bool = False) -> Network:
    """in → trigger → out, with the input current probed as ``iin``."""
    return build_network(
        [
            Block.source("in"),
            Block("st", BlockKind.INV_SCHMITT if inverted else BlockKind.SCHMITT, schmitt=block),
            Block.probe("out"),
            Block.probe("iin"),
        ],
        [Net("st", "in"), Net("out", "st"), Net("iin", "in")],
    )


def _single_io(network: Network, source: str | None, probe: str | None) -> tuple[str, str]:
    if source is None:
        if len(network.sources) != 1:
            raise NetworkError("network needs exactly one source or an explicit source id", network.sources)
        source = network.sources[0]
    if probe is None:
        probe = "out" if "out" in network.probes else (network.probes[0] if network.probes else None)
        if probe is None:
            raise NetworkError("network has no probe", [])
    return source, probe


def _check_range(lo: float, hi: float, steps: int):
    if not (math.isfinite(lo) and math.isfinite(hi)) or lo >= hi:
        raise DomainError(f"sweep needs lo < hi, got {lo}..{hi}")
    if steps < 10:
        raise DomainError(f"sweep needs at least 10 steps, got {steps}")
    if steps > MAX_SWEEP_STEPS:
        raise DomainError(f"sweep allows at most {MAX_SWEEP_STEPS} steps, got {steps}")
    if lo < 0:
        raise DomainError("sweep currents must be nonnegative")


def _sweep(evaluate, points, states):
    """Outputs along ``points`` and the state held before each point."""
    ys, before = [], []
    for u in points:
        before.append(states)
        y, states = evaluate(float(u), states)
        ys.append(y)
    return ys, before, states


def sweep_curve(target: SchmittBlockParams | Network, lo: float, hi: float, steps: int = 200,
                model: Model = "ideal", source: str | None = None,
                probe: str | None = None) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(input grid, up-sweep output, down-sweep output), both on the ascending grid."""
    _check_range(lo, hi, steps)
    network = trigger_network(target) if isinstance(target, SchmittBlockParams) else target
    source, probe = _single_io(network, source, probe)

    def evaluate(u, states):
        res = eval_dc(network, {source: u}, states, model=model)
        return res[probe], res.states

    grid = np.linspace(lo, hi, steps + 1)
    up, _, states = _sweep(evaluate, grid, initial_states(network))
    down, _, _ = _sweep(evaluate, grid[::-1], states)
    return grid, np.asarray(up), np.asarray(down[::-1])


def dc_hysteresis(target: SchmittBlockParams | Network, lo: float, hi: float, steps: int = 200,
                  model: Model = "ideal", tol: float = SWITCH_TOL,
                  source: str | None = None, probe: str | None = None,
                  fixed: Mapping[str, float] | None = None) -> HysteresisMetrics:
    """Up-sweep then down-sweep of one source, tracking state, and locate the
    switching points where the probe crosses half of its high level."""
    _check_range(lo, hi, steps)

    network = trigger_network(target) if isinstance(target, SchmittBlockParams) else target
    source, probe = _single_io(network, source, probe)
    others = dict(fixed or {})

    def evaluate(u: float, states: Mapping[str, SchmittState]):
        res = eval_dc(network, {**others, source: u}, states, model=model)
        return res[probe], res.states

    grid = np.linspace(lo, hi, steps + 1)

    # -------------------------
    # Up-sweep
    # -------------------------
    up_y, up_states, states = _sweep(evaluate, grid, initial_states(network))

    high = max(up_y)
    if high <= 1e-9:
        return HysteresisMetrics.unset()
    level = 0.5 * high

    i_up = next((i for i in range(1, len(grid)) if up_y[i] > level and up_y[i - 1] <= level), None)
    if i_up is None or up_y[0] > level:
        return HysteresisMetrics.unset(high)

    def refine(a: float, b: float, prior, rising: bool) -> float:
        # a is on the pre-switch side, b past it
        while abs(b - a) > tol:
            m = 0.5 * (a + b)
            y, _ = evaluate(m, prior)
            switched = y > level if rising else y <= level
            if switched:
                b = m
            else:
                a = m
        return 0.5 * (a + b)

    u_up = refine(float(grid[i_up - 1]), float(grid[i_up]), up_states[i_up], rising=True)

    # -------------------------
    # Down-sweep
    # -------------------------
    down_grid = grid[::-1]
    down_y, down_states, _ = _sweep(evaluate, down_grid, states)

    i_dn = next((i for i in range(1, len(down_grid)) if down_y[i] <= level and down_y[i - 1] > level), None)
    if i_dn is None or down_y[0] <= level:
        return HysteresisMetrics.unset(high)

    u_down = refine(float(down_grid[i_dn - 1]), float(down_grid[i_dn]), down_states[i_dn], rising=False)

    width = u_up - u_down
    bistable = width > 2 * tol
    return HysteresisMetrics(u_up, u_down, width, high, bistable)


def hysteresis_of(params: SchmittParams, cal: Calibration | None = None, dyn: DynamicsConfig | None = None,
                  lo: float = 0.0, hi: float | None = None, steps: int = 200, model: Model = "ideal",
                  tol: float = SWITCH_TOL) -> HysteresisMetrics:
    block = SchmittBlockParams(params, cal or Calibration(), dyn or DynamicsConfig())
    if hi is None:
        hi = max(500.0, 1.25 * block.op.i_th_high + 10.0)
    return dc_hysteresis(block, lo, hi, steps, model=model, tol=tol)


def temperature_family(params: SchmittParams, cal: Calibration, dyn: DynamicsConfig,
                       temperatures, lo: float = 0.0, hi: float | None = None,
                       steps: int = 200) -> list[tuple[float, HysteresisMetrics]]:
    """DC hysteresis at each temperature through the threshold drift knob."""
    family = []
    for temp in temperatures:
        metrics = hysteresis_of(params, cal, replace(dyn, temperature=float(temp)), lo, hi, steps)
        family.append((float(temp), metrics))
    return family
