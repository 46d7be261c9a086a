"""Statement kinds of a scenario document and the keys each accepts."""
from dataclasses import dataclass, field
from typing import Any

VERSION = 1


@dataclass(frozen=True)
class KeySpec:
    kind: str                       # current, time, steepness, temperature, drift, count, number, word, id, points, events
    required: bool = False
    choices: tuple[str, ...] = ()


def _req(kind: str) -> KeySpec:
    return KeySpec(kind, required=True)


def _word(*choices: str, required: bool = False) -> KeySpec:
    return KeySpec("word", required, choices)


_TRIGGER_KEYS = {
    "i_gain": _req("current"),
    "i_thresh": _req("current"),
    "i_width": _req("current"),
    "cal": _word("default", "ideal"),
    "gain_offset": KeySpec("current"),
    "thresh_offset": KeySpec("current"),
    "width_offset": KeySpec("current"),
    "k": KeySpec("steepness"),
    "tau": KeySpec("time"),
    "tau_fb": KeySpec("time"),
    "tau_out": KeySpec("time"),
    "coupling": KeySpec("number"),
    "drift": KeySpec("drift"),
    "temp": KeySpec("temperature"),
}

BLOCK_KEYS: dict[str, dict[str, KeySpec]] = {
    "source": {},
    "schmitt": _TRIGGER_KEYS,
    "inv_schmitt": _TRIGGER_KEYS,
    "heaviside": {
        "threshold": _req("current"),
        "gain": _req("current"),
        "k": KeySpec("steepness"),
    },
    "probe": {},
}

STIMULUS_KEYS: dict[str, dict[str, KeySpec]] = {
    "constant": {"value": _req("current")},
    "step": {"before": _req("current"), "after": _req("current"), "at": _req("time")},
    "triangle": {
        "lo": _req("current"),
        "hi": _req("current"),
        "period": _req("time"),
        "cycles": KeySpec("count"),
        "delay": KeySpec("time"),
    },
    "pwl": {"points": _req("points")},
    "spikes": {
        "events": _req("events"),
        "pulse": KeySpec("time"),
        "rest": KeySpec("current"),
        "level0": KeySpec("current"),
        "level1": KeySpec("current"),
    },
}

ANALYSIS_KEYS: dict[str, dict[str, KeySpec]] = {
    "dc_sweep": {
        "source": KeySpec("id"),
        "probe": KeySpec("id"),
        "lo": _req("current"),
        "hi": _req("current"),
        "steps": KeySpec("count"),
        "model": _word("ideal", "smooth"),
    },
    "transient": {
        "t_stop": _req("time"),
        "dt": KeySpec("time"),
        "save_every": KeySpec("count"),
    },
    "monte_carlo": {
        "target": KeySpec("id"),
        "sigma": KeySpec("current"),
        "runs": KeySpec("count"),
        "steps": KeySpec("count"),
        "workers": KeySpec("count"),
    },
    "tunability": {
        "knob": _word("gain", "thresh", "width", required=True),
        "target": KeySpec("id"),
        "lo": KeySpec("current"),
        "hi": KeySpec("current"),
        "steps": KeySpec("count"),
    },
    "gate": {
        "kind": _word("and", "or", "nand", "nor", "xor", required=True),
        "mode": _word("ideal", "calibrated"),
        "t_stop": KeySpec("time"),
    },
}

STATEMENTS = ("version", "block", "net", "stimulus", "analysis", "seed")


# -------------------------
# Document
# -------------------------
@dataclass
class BlockDecl:
    id: str
    kind: str
    params: dict[str, Any] = field(default_factory=dict)
    line: int = field(default=0, compare=False)


@dataclass
class NetDecl:
    target: str
    drivers: tuple[str, ...]
    line: int = field(default=0, compare=False)


@dataclass
class StimulusDecl:
    source: str
    kind: str
    params: dict[str, Any] = field(default_factory=dict)
    line: int = field(default=0, compare=False)


@dataclass
class AnalysisDecl:
    kind: str
    params: dict[str, Any] = field(default_factory=dict)
    line: int = field(default=0, compare=False)


@dataclass
class ScenarioDoc:
    version: int = VERSION
    blocks: list[BlockDecl] = field(default_factory=list)
    nets: list[NetDecl] = field(default_factory=list)
    stimuli: list[StimulusDecl] = field(default_factory=list)
    analyses: list[AnalysisDecl] = field(default_factory=list)
    seed: int | None = None

    @property
    def analysis(self) -> AnalysisDecl | None:
        return self.analyses[0] if self.analyses else None

    def block(self, bid: str) -> BlockDecl | None:
        return next((b for b in self.blocks if b.id == bid), None)

    def ids_of(self, *kinds: str) -> list[str]:
        return [b.id for b in self.blocks if b.kind in kinds]
