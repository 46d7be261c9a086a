import math
from dataclasses import dataclass

import numpy as np

from ..errors import StimulusError

# Grid times are accumulated in floating point; an edge this close to a grid
# point belongs to that grid point.
EDGE_EPS = 1e-12  # s

MAX_CYCLES = 100_000


class Waveform:
    """A source current as a function of time (pA)."""

    # True when the value is held through an integration step (no inter-sample events)
    held: bool = False

    def sample(self, times: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def value(self, t: float) -> float:
        return float(self.sample(np.array([t]))[0])


def _check_currents(values, what: str):
    for v in values:
        if not math.isfinite(v) or v < 0:
            raise StimulusError(f"{what}: currents must be finite and nonnegative, got {v}")


def _check_times(times, what: str):
    for t in times:
        if not math.isfinite(t):
            raise StimulusError(f"{what}: non-finite time {t}")
    if any(b < a for a, b in zip(times, times[1:])):
        raise StimulusError(f"{what}: times must be sorted")


@dataclass(frozen=True)
class Constant(Waveform):
    level: float
    held = True

    def __post_init__(self):
        _check_currents([self.level], "constant")

    def sample(self, times):
        return np.full(np.shape(times), float(self.level))


@dataclass(frozen=True)
class PiecewiseLinear(Waveform):
    times: tuple[float, ...]
    values: tuple[float, ...]

    def __post_init__(self):
        if len(self.times) != len(self.values) or not self.times:
            raise StimulusError("pwl: need matching, non-empty time and value lists")
        _check_times(self.times, "pwl")
        _check_currents(self.values, "pwl")

    def sample(self, times):
        return np.interp(np.asarray(times, dtype=float), self.times, self.values)


@dataclass(frozen=True)
class PiecewiseConstant(Waveform):
    """``initial`` before the first edge, ``values[i]`` from ``times[i]`` on."""
    initial: float
    times: tuple[float, ...] = ()
    values: tuple[float, ...] = ()
    held = True

    def __post_init__(self):
        if len(self.times) != len(self.values):
            raise StimulusError("pwc: need matching time and value lists")
        _check_times(self.times, "pwc")
        _check_currents([self.initial, *self.values], "pwc")

    def sample(self, times):
        times = np.asarray(times, dtype=float)
        if not self.times:
            return np.full(times.shape, float(self.initial))
        levels = np.concatenate(([self.initial], self.values))
        idx = np.searchsorted(np.asarray(self.times), times + EDGE_EPS, side="right")
        return levels[idx]


def triangle(lo: float, hi: float, period: float, cycles: int = 1, delay: float = 0.0) -> PiecewiseLinear:
    """lo → hi → lo ramps, ``cycles`` times, starting after ``delay``."""
    if period <= 0 or cycles < 1:
        raise StimulusError("triangle: period must be positive and cycles at least 1")
    if cycles > MAX_CYCLES:
        raise StimulusError(f"triangle: at most {MAX_CYCLES} cycles, got {cycles}")
    if hi <= lo:
        raise StimulusError("triangle: hi must exceed lo")
    times = [0.0] if delay > 0 else []
    values = [lo] if delay > 0 else []
    for n in range(cycles):
        t0 = delay + n * period
        if n == 0:
            times.append(t0)
            values.append(lo)
        times += [t0 + 0.5 * period, t0 + period]
        values += [hi, lo]
    return PiecewiseLinear(tuple(times), tuple(values))


def step(level_before: float, level_after: float, at: float) -> PiecewiseConstant:
    return PiecewiseConstant(level_before, (at,), (level_after,))
