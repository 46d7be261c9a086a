import math

from ..analysis.hysteresis import MAX_SWEEP_STEPS
from ..analysis.montecarlo import MAX_RUNS
from ..analysis.tunability import MAX_SET_POINTS
from ..core.params import DynamicsConfig
from ..errors import ConfigurationError, ScenarioError, SeparationError, StimulusError
from ..graph.network import topological_order
from ..graph.transient import DT_FRACTION, MAX_SAMPLES, MAX_STEPS
from .build import encoding_of, to_block, trigger_params, trigger_tau_max, waveform
from .diagnostics import Diagnostic, errors, sort_diagnostics, with_suggestion
from .parser import read_scenario
from .schema import BLOCK_KEYS, STIMULUS_KEYS, BlockDecl, ScenarioDoc

TRIGGERS = ("schmitt", "inv_schmitt")


def _has_required(decl, table) -> bool:
    return all(k in decl.params for k, spec in table[decl.kind].items() if spec.required)


class _Checker:
    def __init__(self, doc: ScenarioDoc):
        self.doc = doc
        self.diags: list[Diagnostic] = []
        self.ids = {b.id: b for b in doc.blocks}
        self.gate = doc.analysis is not None and doc.analysis.kind == "gate"

    def error(self, code, line, message, ident=None):
        self.diags.append(Diagnostic.error(code, line, 1, message, ident))

    def warning(self, code, line, message, ident=None):
        self.diags.append(Diagnostic.warning(code, line, 1, message, ident))

    def ref(self, bid: str, line: int, what: str, kinds: tuple[str, ...] | None = None) -> BlockDecl | None:
        decl = self.ids.get(bid)
        if decl is None:
            self.error("E200", line, with_suggestion(f"{what} {bid!r} is not a declared block", bid, self.ids), bid)
            return None
        if kinds and decl.kind not in kinds:
            self.error("E200", line, f"{what} {bid!r} is a {decl.kind}, expected {' or '.join(kinds)}", bid)
            return None
        return decl

    # -------------------------
    # Blocks
    # -------------------------
    def blocks(self):
        for b in self.doc.blocks:
            if not _has_required(b, BLOCK_KEYS):
                continue
            if b.kind in TRIGGERS:
                p = b.params
                if p["i_width"].base >= p["i_thresh"].base:
                    self.error("E201", b.line,
                               f"block {b.id}: bistability requires i_width < i_thresh "
                               f"(i_width={p['i_width']}, i_thresh={p['i_thresh']})", b.id)
                    continue
            try:
                to_block(b)
            except ConfigurationError as e:
                code = "E201" if "bistability" in str(e) else "E202"
                self.error(code, b.line, f"block {b.id}: {e}", b.id)

    # -------------------------
    # Nets
    # -------------------------
    def nets(self):
        driven: dict[str, list[str]] = {bid: [] for bid in self.ids}
        fanout: set[str] = set()
        resolved = True
        for n in self.doc.nets:
            target = self.ref(n.target, n.line, "net target")
            if target is not None and target.kind == "source":
                self.error("E200", n.line, f"source {n.target} cannot be driven", n.target)
                target = None
            ok = target is not None
            for d in n.drivers:
                decl = self.ref(d, n.line, "driver")
                if decl is None:
                    ok = False
                elif decl.kind == "probe":
                    self.error("E200", n.line, f"probe {d} cannot drive a net", d)
                    ok = False
            if ok:
                driven[n.target].extend(n.drivers)
                fanout.update(n.drivers)
            resolved = resolved and ok

        if self.gate:
            return
        for b in self.doc.blocks:
            if b.kind != "source" and not driven[b.id]:
                self.error("E206", b.line, f"block {b.id} has an undriven input", b.id)
            if b.kind != "probe" and b.id not in fanout:
                self.warning("W300", b.line, f"block {b.id} drives nothing", b.id)

        if resolved:
            _, cyclic = topological_order(driven)
            if cyclic:
                line = min(self.ids[c].line for c in cyclic)
                self.error("E205", line, f"cycle through {', '.join(cyclic)}", cyclic[0])

    # -------------------------
    # Stimuli
    # -------------------------
    def stimuli(self):
        seen = set()
        tau = trigger_tau_max(self.doc)
        for s in self.doc.stimuli:
            if s.source in seen:
                self.error("E103", s.line, f"second stimulus for source {s.source}", s.source)
                continue
            seen.add(s.source)
            if self.gate:
                if s.source not in ("a", "b"):
                    self.error("E200", s.line, f"gate inputs are 'a' and 'b', got {s.source!r}", s.source)
            else:
                self.ref(s.source, s.line, "stimulus source", ("source",))
            if not _has_required(s, STIMULUS_KEYS):
                continue
            try:
                waveform(s, tau)
            except SeparationError as e:
                self.error("E203", s.line, f"stimulus {s.source}: {e}", s.source)
            except (StimulusError, ConfigurationError) as e:
                self.error("E202", s.line, f"stimulus {s.source}: {e}", s.source)

    # -------------------------
    # Analysis
    # -------------------------
    def analysis(self):
        if not self.doc.analyses:
            self.error("E104", 1, "scenario has no analysis statement")
            return
        a = self.doc.analysis
        p = a.params
        sources = self.doc.ids_of("source")
        probes = self.doc.ids_of("probe")

        def positive(key, what=None):
            if key in p and not p[key].base > 0:
                self.error("E202", a.line, f"{what or key} must be positive, got {p[key]}", key)

        def at_least(key, n):
            if key in p and p[key] < n:
                self.error("E202", a.line, f"{key} must be at least {n}, got {p[key]}", key)

        def at_most(key, n):
            if key in p and p[key] > n:
                self.error("E202", a.line, f"{key} must be at most {n}, got {p[key]}", key)

        match a.kind:
            case "dc_sweep":
                if "source" in p:
                    self.ref(p["source"], a.line, "sweep source", ("source",))
                elif len(sources) != 1:
                    self.error("E200", a.line, f"dc_sweep needs source= with {len(sources)} sources declared")
                if "probe" in p:
                    self.ref(p["probe"], a.line, "sweep probe", ("probe",))
                if "lo" in p and "hi" in p:
                    if p["lo"].base < 0:
                        self.error("E202", a.line, "sweep lo must be nonnegative", "lo")
                    if not p["lo"].base < p["hi"].base:
                        self.error("E202", a.line, f"sweep needs lo < hi, got {p['lo']}..{p['hi']}", "hi")
                at_least("steps", 10)
                at_most("steps", MAX_SWEEP_STEPS)
                if not probes:
                    self.warning("W301", a.line, "dc_sweep without a probe block")

            case "transient":
                positive("t_stop")
                positive("dt")
                if "dt" in p:
                    bound = self._dt_bound()
                    if p["dt"].base > bound * (1 + 1e-12):
                        self.error("E202", a.line, f"dt={p['dt']} exceeds the stability bound {bound:.4g} s", "dt")
                at_least("save_every", 1)
                self._run_length(p)
                if not probes:
                    self.warning("W301", a.line, "transient without a probe block records nothing")

            case "monte_carlo":
                if "target" in p:
                    self.ref(p["target"], a.line, "target", TRIGGERS)
                elif len(self.doc.ids_of(*TRIGGERS)) > 1:
                    self.error("E200", a.line, "monte_carlo needs target= with several triggers declared")
                if "sigma" in p and p["sigma"].base < 0:
                    self.error("E202", a.line, "sigma must be nonnegative", "sigma")
                at_least("runs", 1)
                at_least("steps", 10)
                at_most("runs", MAX_RUNS)
                at_most("steps", MAX_SWEEP_STEPS)

            case "tunability":
                if "target" in p:
                    self.ref(p["target"], a.line, "target", TRIGGERS)
                if "lo" in p and "hi" in p and not p["lo"].base < p["hi"].base:
                    self.error("E202", a.line, "tunability needs lo < hi", "hi")
                at_least("steps", 1)
                at_most("steps", MAX_SET_POINTS)

            case "gate":
                positive("t_stop")
                by_source = {s.source: s for s in self.doc.stimuli}
                for name in ("a", "b"):
                    s = by_source.get(name)
                    if s is None or s.kind != "spikes":
                        self.error("E200", a.line, f"gate needs a spikes stimulus on input {name!r}", name)
                self._gate_inputs(a, by_source)

    def _run_length(self, p):
        if "t_stop" not in p or not p["t_stop"].base > 0:
            return
        dt = p["dt"].base if "dt" in p and p["dt"].base > 0 else self._dt_bound()
        line = self.doc.analysis.line
        steps = p["t_stop"].base / dt
        if not math.isfinite(steps):
            return
        if steps > MAX_STEPS:
            self.error("E202", line, f"t_stop={p['t_stop']} needs {steps:.3g} steps, the limit is {MAX_STEPS}",
                       "t_stop")
        elif steps // max(1, p.get("save_every", 1)) + 1 > MAX_SAMPLES:
            self.error("E202", line, f"more than {MAX_SAMPLES} recorded samples, raise save_every", "save_every")

    def _gate_inputs(self, a, by_source):
        spikes = [by_source.get(name) for name in ("a", "b")]
        if any(s is None or s.kind != "spikes" or not _has_required(s, STIMULUS_KEYS) for s in spikes):
            return
        try:
            enc_a, enc_b = (encoding_of(s) for s in spikes)
        except ConfigurationError:
            return
        if enc_a != enc_b:
            self.error("E202", spikes[1].line, "gate inputs a and b must use the same levels and pulse width", "b")

        gate_dt = DynamicsConfig().tau_min * DT_FRACTION
        last = max((t.base for s in spikes for t, _ in s.params["events"]), default=0.0)
        t_stop = a.params["t_stop"].base if "t_stop" in a.params else last
        if max(t_stop, last) / gate_dt > MAX_STEPS:
            self.error("E202", a.line, f"gate run needs more than {MAX_STEPS} steps", "t_stop")

    def _dt_bound(self) -> float:
        taus = []
        for b in self.doc.blocks:
            if b.kind in TRIGGERS and _has_required(b, BLOCK_KEYS):
                try:
                    taus.append(trigger_params(b).dyn.tau_min)
                except ConfigurationError:
                    continue
        return min(taus) * DT_FRACTION if taus else float("inf")

    def run(self) -> list[Diagnostic]:
        self.blocks()
        self.nets()
        self.stimuli()
        self.analysis()
        return sort_diagnostics(self.diags)


def validate_scenario(doc: ScenarioDoc) -> list[Diagnostic]:
    """Every cross-reference and range diagnostic of a parsed document."""
    return _Checker(doc).run()


def load_scenario(text: str | bytes) -> tuple[ScenarioDoc, list[Diagnostic]]:
    """Parse and validate; raise ScenarioError with all diagnostics on any error.

    Returns the document and its warnings.
    """
    doc, diags = read_scenario(text)
    diags = sort_diagnostics(diags + validate_scenario(doc))
    if errors(diags):
        raise ScenarioError(diags)
    return doc, diags
