import logging
import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import NamedTuple

from scipy.optimize import bisect
from scipy.special import expit

from ..errors import DomainError
from .params import Calibration, DynamicsConfig, Operating, SchmittParams, operating_point

log = logging.getLogger(__name__)

# Bisection tolerance for fixed points (pA)
EQ_XTOL = 1e-3


# -------------------------
# Heaviside element
# -------------------------
def heaviside_smooth(u: float, gain: float, k: float) -> float:
    """Logistic surrogate of the thresholding element: gain·σ(k·u)."""
    if not (math.isfinite(u) and math.isfinite(gain) and math.isfinite(k)):
        raise DomainError(f"non-finite input to heaviside_smooth (u={u}, gain={gain}, k={k})")
    if gain < 0:
        raise DomainError(f"gain must be nonnegative, got {gain}")
    if k <= 0:
        raise DomainError(f"steepness must be strictly positive, got {k}")
    return float(gain * expit(k * u))


def heaviside_sharp(u: float, gain: float) -> float:
    return gain if u > 0 else 0.0


# -------------------------
# State
# -------------------------
class Branch(Enum):
    LOW = "low"
    HIGH = "high"


@dataclass(frozen=True)
class SchmittState:
    branch: Branch = Branch.LOW
    i_fb: float = 0.0
    i_out: float = 0.0
    undefined: bool = False

    @classmethod
    def low(cls, undefined: bool = False) -> "SchmittState":
        return cls(Branch.LOW, 0.0, 0.0, undefined)

    @classmethod
    def high(cls, op: Operating) -> "SchmittState":
        return cls(Branch.HIGH, op.hyst_width, op.high_level, False)


class Equilibrium(NamedTuple):
    i_fb: float
    i_out: float


# -------------------------
# Static characteristics
# -------------------------
def schmitt_thresholds(params: SchmittParams, cal: Calibration, dyn: DynamicsConfig | None = None) -> Operating:
    """(i_th_high, i_th_low, hyst_width, high_level) realised by the trigger."""
    return operating_point(params, cal, dyn)


def ideal_step(params: SchmittParams, cal: Calibration, i_in: float, state: SchmittState,
               dyn: DynamicsConfig | None = None) -> tuple[SchmittState, float]:
    op = operating_point(params, cal, dyn)
    return ideal_step_op(op, i_in, state)


def ideal_step_op(op: Operating, i_in: float, state: SchmittState) -> tuple[SchmittState, float]:
    if not math.isfinite(i_in):
        raise DomainError(f"non-finite input current {i_in}")

    branch = state.branch
    if i_in > op.i_th_high:
        branch = Branch.HIGH
    elif i_in < op.i_th_low:
        branch = Branch.LOW

    crossed = i_in > op.i_th_high or i_in < op.i_th_low
    undefined = state.undefined and not crossed

    if branch is Branch.HIGH:
        new = SchmittState(Branch.HIGH, op.hyst_width, op.high_level, undefined)
        return new, op.high_level
    return SchmittState(Branch.LOW, 0.0, 0.0, undefined), 0.0


def complement(i_out: float, high_level: float) -> float:
    return min(max(high_level - i_out, 0.0), high_level)


def inverted_output(i_out: float, params: SchmittParams, cal: Calibration,
                    dyn: DynamicsConfig | None = None) -> float:
    """Output of the inverted trigger sharing the same state machine."""
    if not math.isfinite(i_out):
        raise DomainError(f"non-finite output current {i_out}")
    high = operating_point(params, cal, dyn).high_level
    if i_out > high:
        log.warning("inverted_output: i_out=%.3f pA exceeds high level %.3f pA, clamped to 0", i_out, high)
        return 0.0
    return complement(i_out, high)


# -------------------------
# Continuous dynamics
# -------------------------
def smooth_rhs(state: SchmittState, i_in: float, params: SchmittParams, cal: Calibration,
               dyn: DynamicsConfig) -> tuple[float, float]:
    """Time derivatives (d i_fb/dt, d i_out/dt) in pA/s.

    The feedback element is driven by the output branch; the coupling term
    injects the feedback branch's slew into the output branch.
    """
    op = operating_point(params, cal, dyn)
    return rhs_op(op, dyn, i_in, state.i_fb, state.i_out)


def rhs_op(op: Operating, dyn: DynamicsConfig, i_in: float, i_fb: float, i_out: float) -> tuple[float, float]:
    """Output-driven feedback lag plus an output lag. The coupling term feeds
    the feedback slew back into the output branch, which makes the step
    response second order and produces the overshoot; with zero coupling the
    output is a plain first-order lag."""
    a = expit(dyn.steepness_k * (i_in + i_fb - op.i_th_high))
    fb_drive = op.hyst_width * i_out / op.high_level - i_fb
    d_fb = fb_drive / dyn.tau_fb
    inject = dyn.overshoot_coupling * (op.high_level / op.hyst_width) * fb_drive
    d_out = (op.high_level * a + inject - i_out) / dyn.tau_out
    return float(d_fb), float(d_out)


def _logit_low(q: float) -> float:
    # smaller root of s(1 - s) = q, without cancellation
    s = 2.0 * q / (1.0 + math.sqrt(1.0 - 4.0 * q))
    return math.log(s) - math.log1p(-s)


def smooth_equilibria(params: SchmittParams, cal: Calibration, dyn: DynamicsConfig, i_in: float) -> list[Equilibrium]:
    op = operating_point(params, cal, dyn)
    return equilibria_op(op, dyn.steepness_k, i_in)


def equilibria_op(op: Operating, k: float, i_in: float, xtol: float = EQ_XTOL) -> list[Equilibrium]:
    """Stable solutions of i_fb = W·σ(k(i_in + i_fb − T)), sorted by i_fb."""
    if not math.isfinite(i_in):
        raise DomainError(f"non-finite input current {i_in}")

    w, t, g_high = op.hyst_width, op.i_th_high, op.high_level

    def g(x):
        return w * expit(k * (i_in + x - t)) - x

    # g is decreasing except between the two points where W·k·σ(1−σ) = 1
    q = 1.0 / (w * k)
    if q >= 0.25:
        segments = [(0.0, w)]
    else:
        z = _logit_low(q) / k
        x_lo = min(max(t - i_in + z, 0.0), w)
        x_hi = min(max(t - i_in - z, 0.0), w)
        segments = [(0.0, x_lo), (x_hi, w)]

    roots = []
    for a, b in segments:
        if b <= a:
            continue
        ga, gb = g(a), g(b)
        if ga == 0.0:
            roots.append(a)
        elif gb == 0.0:
            roots.append(b)
        elif ga > 0.0 > gb:
            roots.append(bisect(g, a, b, xtol=xtol))

    roots = sorted(set(roots))
    return [Equilibrium(float(x), float(g_high * x / w)) for x in roots]


def nearest_equilibrium(eqs: list[Equilibrium], i_fb: float) -> Equilibrium:
    return min(eqs, key=lambda e: abs(e.i_fb - i_fb))


def smooth_settle(op: Operating, k: float, i_in: float, state: SchmittState) -> SchmittState:
    """Equilibrium continuous with ``state`` for a held input."""
    eqs = equilibria_op(op, k, i_in)
    eq = nearest_equilibrium(eqs, state.i_fb)
    branch = Branch.HIGH if eq.i_out >= 0.5 * op.high_level else Branch.LOW
    undefined = state.undefined and branch is state.branch
    return replace(state, branch=branch, i_fb=eq.i_fb, i_out=eq.i_out, undefined=undefined)

