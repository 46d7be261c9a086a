import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable

from ..errors import ConfigurationError, SeparationError, StimulusError
from ..graph.stimuli import PiecewiseConstant

# Settling allowance after a pulse, in multiples of the slowest time constant
SETTLE_TAUS = 10.0


class Polarity(Enum):
    POS = "+"
    NEG = "-"

    @property
    def bit(self) -> int:
        return 1 if self is Polarity.POS else 0


@dataclass(frozen=True)
class Encoding:
    """Three-level spike encoding (pA) and its decode bands."""
    level0: float = 0.0
    rest: float = 250.0
    level1: float = 500.0
    pulse_width: float = 5e-3   # s

    def __post_init__(self):
        for name in ("level0", "rest", "level1", "pulse_width"):
            if not math.isfinite(getattr(self, name)):
                raise ConfigurationError(f"encoding {name} must be finite")
        if not (0.0 <= self.level0 < self.rest < self.level1):
            raise ConfigurationError(
                f"encoding needs 0 <= level0 < rest < level1, got {self.level0}/{self.rest}/{self.level1} pA"
            )
        if self.pulse_width <= 0:
            raise ConfigurationError("pulse_width must be strictly positive")

    @property
    def low_band(self) -> float:
        return 0.5 * (self.level0 + self.rest)

    @property
    def high_band(self) -> float:
        return 0.5 * (self.rest + self.level1)

    def decode(self, current: float) -> int | None:
        """0 below the low band, 1 above the high band, None in between."""
        if current < self.low_band:
            return 0
        if current > self.high_band:
            return 1
        return None

    def level(self, polarity: Polarity) -> float:
        return self.level1 if polarity is Polarity.POS else self.level0


@dataclass(frozen=True, order=True)
class SpikeEvent:
    time: float          # s
    polarity: Polarity

    def __post_init__(self):
        if not math.isfinite(self.time) or self.time < 0:
            raise StimulusError(f"spike time must be finite and nonnegative, got {self.time}")

    def __str__(self):
        return f"{self.time * 1e3:g}ms:{self.polarity.value}"


def min_separation(enc: Encoding, tau_max: float) -> float:
    return enc.pulse_width + SETTLE_TAUS * tau_max


@dataclass(frozen=True)
class SpikeProgram:
    events: tuple[SpikeEvent, ...] = ()

    @classmethod
    def of(cls, *events: tuple[float, Polarity | str]) -> "SpikeProgram":
        return cls(tuple(SpikeEvent(float(t), Polarity(p)) for t, p in events))

    def validate(self, enc: Encoding, tau_max: float) -> None:
        """Raise SeparationError naming the first pair of events that overlap."""
        for a, b in zip(self.events, self.events[1:]):
            if b.time < a.time:
                raise StimulusError(f"spike events out of order: {a} before {b}")
        gap = min_separation(enc, tau_max)
        for a, b in zip(self.events, self.events[1:]):
            if b.time - a.time < gap - 1e-12:
                raise SeparationError(
                    f"spikes {a} and {b} are {1e3 * (b.time - a.time):g} ms apart, "
                    f"need at least {1e3 * gap:g} ms",
                    a, b,
                )

    @property
    def last(self) -> SpikeEvent | None:
        return self.events[-1] if self.events else None

    def __iter__(self):
        return iter(self.events)

    def __len__(self):
        return len(self.events)


def render_stimulus(program: SpikeProgram, enc: Encoding, tau_max: float = 159e-6) -> PiecewiseConstant:
    """Rest level with one pulse per event: level1 for +, level0 for −."""
    program.validate(enc, tau_max)
    times: list[float] = []
    values: list[float] = []
    for ev in program:
        times += [ev.time, ev.time + enc.pulse_width]
        values += [enc.level(ev.polarity), enc.rest]
    return PiecewiseConstant(enc.rest, tuple(times), tuple(values))


def merged_times(programs: Iterable[SpikeProgram]) -> list[float]:
    return sorted({ev.time for p in programs for ev in p})
