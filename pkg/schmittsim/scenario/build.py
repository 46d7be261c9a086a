import logging
from dataclasses import dataclass, replace
from typing import Any

from ..analysis.hysteresis import dc_hysteresis
from ..analysis.montecarlo import DEFAULT_SIGMA, monte_carlo
from ..analysis.tunability import tunability_sweep
from ..core.params import Calibration, DynamicsConfig, SchmittParams
from ..errors import ConfigurationError, NetworkError
from ..graph.blocks import Block, BlockKind, HeavisideParams, Net, SchmittBlockParams
from ..graph.network import Network, build_network
from ..graph.stimuli import Constant, PiecewiseLinear, Waveform, step, triangle
from ..graph.transient import dt_bound, run_transient
from ..logic.encoding import Encoding, SpikeProgram, render_stimulus
from ..logic.harness import run_gate
from .schema import AnalysisDecl, BlockDecl, ScenarioDoc, StimulusDecl

log = logging.getLogger(__name__)

DEFAULT_TAU = DynamicsConfig().tau_max


def _base(value) -> float:
    return value.base


def trigger_params(decl: BlockDecl) -> SchmittBlockParams:
    p = decl.params
    params = SchmittParams(_base(p["i_gain"]), _base(p["i_thresh"]), _base(p["i_width"]))

    cal = Calibration.ideal() if p.get("cal") == "ideal" else Calibration()
    offsets = {k: _base(p[k]) for k in ("gain_offset", "thresh_offset", "width_offset") if k in p}
    if offsets:
        cal = replace(cal, **offsets)

    dyn = {}
    if "tau" in p:
        dyn["tau_fb"] = dyn["tau_out"] = _base(p["tau"])
    for key in ("tau_fb", "tau_out"):
        if key in p:
            dyn[key] = _base(p[key])
    if "k" in p:
        dyn["steepness_k"] = _base(p["k"])
    if "coupling" in p:
        dyn["overshoot_coupling"] = float(p["coupling"])
    if "drift" in p:
        dyn["temp_thresh_drift"] = _base(p["drift"])
    if "temp" in p:
        dyn["temperature"] = _base(p["temp"])
    return SchmittBlockParams(params, cal, DynamicsConfig(**dyn))


def to_block(decl: BlockDecl) -> Block:
    kind = BlockKind(decl.kind)
    if kind in (BlockKind.SCHMITT, BlockKind.INV_SCHMITT):
        return Block(decl.id, kind, schmitt=trigger_params(decl))
    if kind is BlockKind.HEAVISIDE:
        p = decl.params
        k = _base(p["k"]) if "k" in p else 1.0
        return Block(decl.id, kind, heaviside=HeavisideParams(_base(p["threshold"]), _base(p["gain"]), k))
    return Block(decl.id, kind)


def encoding_of(decl: StimulusDecl) -> Encoding:
    p = decl.params
    defaults = Encoding()
    return Encoding(
        level0=_base(p["level0"]) if "level0" in p else defaults.level0,
        rest=_base(p["rest"]) if "rest" in p else defaults.rest,
        level1=_base(p["level1"]) if "level1" in p else defaults.level1,
        pulse_width=_base(p["pulse"]) if "pulse" in p else defaults.pulse_width,
    )


def program_of(decl: StimulusDecl) -> SpikeProgram:
    return SpikeProgram.of(*((t.base, pol) for t, pol in decl.params["events"]))


def waveform(decl: StimulusDecl, tau_max: float = DEFAULT_TAU) -> Waveform:
    p = decl.params
    match decl.kind:
        case "constant":
            return Constant(_base(p["value"]))
        case "step":
            return step(_base(p["before"]), _base(p["after"]), _base(p["at"]))
        case "triangle":
            return triangle(_base(p["lo"]), _base(p["hi"]), _base(p["period"]),
                            cycles=p.get("cycles", 1), delay=_base(p["delay"]) if "delay" in p else 0.0)
        case "pwl":
            pts = p["points"]
            return PiecewiseLinear(tuple(t.base for t, _ in pts), tuple(i.base for _, i in pts))
        case "spikes":
            return render_stimulus(program_of(decl), encoding_of(decl), tau_max)
    raise ConfigurationError(f"unknown stimulus kind {decl.kind!r}")


def trigger_tau_max(doc: ScenarioDoc) -> float:
    taus = []
    for b in doc.blocks:
        if b.kind in ("schmitt", "inv_schmitt"):
            try:
                taus.append(trigger_params(b).dyn.tau_max)
            except (ConfigurationError, KeyError):
                continue
    return max(taus, default=DEFAULT_TAU)


def build_from_scenario(doc: ScenarioDoc) -> tuple[Network, dict[str, Waveform]]:
    network = build_network([to_block(b) for b in doc.blocks], [Net(n.target, n.drivers) for n in doc.nets])
    tau = trigger_tau_max(doc)
    stimuli = {s.source: waveform(s, tau) for s in doc.stimuli}
    return network, stimuli


# -------------------------
# Running the analysis
# -------------------------
@dataclass(frozen=True)
class ScenarioResult:
    kind: str
    payload: Any


def _only(ids: list[str], what: str) -> str:
    if len(ids) != 1:
        raise NetworkError(f"scenario needs an explicit {what} (found {len(ids)})", ids)
    return ids[0]


def _target(doc: ScenarioDoc, a: AnalysisDecl) -> SchmittBlockParams | None:
    bid = a.params.get("target")
    triggers = doc.ids_of("schmitt", "inv_schmitt")
    if bid is None:
        if not triggers:
            return None
        bid = _only(triggers, "target")
    return trigger_params(doc.block(bid))


def run_scenario(doc: ScenarioDoc, workers: int = 1) -> ScenarioResult:
    a = doc.analysis
    p = a.params
    log.info("running %s analysis", a.kind)

    match a.kind:
        case "dc_sweep":
            network, stimuli = build_from_scenario(doc)
            source = p.get("source") or _only(network.sources, "source")
            fixed = {s: w.value(0.0) for s, w in stimuli.items() if s != source}
            metrics = dc_hysteresis(network, _base(p["lo"]), _base(p["hi"]), p.get("steps", 200),
                                    model=p.get("model", "ideal"), source=source, probe=p.get("probe"),
                                    fixed=fixed)
            return ScenarioResult(a.kind, metrics)

        case "transient":
            network, stimuli = build_from_scenario(doc)
            dt = _base(p["dt"]) if "dt" in p else dt_bound(network)
            trace = run_transient(network, stimuli, _base(p["t_stop"]), dt, save_every=p.get("save_every", 1))
            return ScenarioResult(a.kind, trace)

        case "monte_carlo":
            base = _target(doc, a) or SchmittBlockParams(SchmittParams.baseline())
            sigma = _base(p["sigma"]) if "sigma" in p else DEFAULT_SIGMA
            dist = monte_carlo(base, sigma, p.get("runs", 500), seed=doc.seed or 0,
                               workers=p.get("workers", workers), steps=p.get("steps", 100))
            return ScenarioResult(a.kind, dist)

        case "tunability":
            base = _target(doc, a)
            kw = {}
            if base is not None:
                kw = {"cal": base.cal, "dyn": base.dyn}
            report = tunability_sweep(p["knob"], _base(p["lo"]) if "lo" in p else None,
                                      _base(p["hi"]) if "hi" in p else None, p.get("steps", 10), **kw)
            return ScenarioResult(a.kind, report)

        case "gate":
            by_source = {s.source: s for s in doc.stimuli}
            programs = (program_of(by_source["a"]), program_of(by_source["b"]))
            enc = encoding_of(by_source["a"])
            if encoding_of(by_source["b"]) != enc:
                raise ConfigurationError("gate inputs a and b must use the same levels and pulse width")
            t_stop = _base(p["t_stop"]) if "t_stop" in p else None
            run = run_gate(p["kind"], programs, enc, t_stop=t_stop, mode=p.get("mode", "calibrated"))
            return ScenarioResult(a.kind, run)

    raise ConfigurationError(f"unknown analysis {a.kind!r}")
