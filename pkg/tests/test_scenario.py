import csv
import io
import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from schmittsim.analysis.hysteresis import MAX_SWEEP_STEPS, HysteresisMetrics, dc_hysteresis, trigger_network
from schmittsim.analysis.montecarlo import MAX_RUNS, monte_carlo
from schmittsim.analysis.tunability import MAX_SET_POINTS, tunability_sweep
from schmittsim.core.params import SchmittParams
from schmittsim.errors import ConfigurationError, DomainError, IntegrationError, ScenarioError
from schmittsim.graph.blocks import SchmittBlockParams
from schmittsim.graph.transient import MAX_SAMPLES, MAX_STEPS, Trace, dt_bound, run_transient
from schmittsim.scenario.build import build_from_scenario, run_scenario, trigger_params
from schmittsim.scenario.parser import format_scenario, parse_scenario, read_scenario
from schmittsim.scenario.serialize import serialize_results
from schmittsim.scenario.units import UnitError, parse_quantity
from schmittsim.scenario.validate import load_scenario, validate_scenario

MINIMAL = """\
version 1
# a lone trigger
block in source
block st schmitt i_gain=486pA i_thresh=368pA i_width=216pA
block out probe
net st <- in
net out <- st
analysis dc_sweep lo=0pA hi=500pA steps=200
"""


def _codes(diags) -> list[str]:
    return [d.code for d in diags]


def _fails_with(text: str) -> list[str]:
    with pytest.raises(ScenarioError) as e:
        load_scenario(text)
    return _codes(e.value.diagnostics)


# -------------------------
# Units
# -------------------------
@pytest.mark.parametrize("text,dim,base", [
    ("250pA", "current", 250.0),
    ("0.5nA", "current", 500.0),
    ("5ms", "time", 5e-3),
    ("159us", "time", 159e-6),
    ("1/pA", "steepness", 1.0),
])
def test_quantities(text, dim, base):
    assert parse_quantity(text, dim).base == pytest.approx(base)


@pytest.mark.parametrize("text,dim", [("250", "current"), ("5ms", "current"), ("250mA", "current"), ("pA", "current")])
def test_bad_quantities(text, dim):
    with pytest.raises(UnitError):
        parse_quantity(text, dim)


# -------------------------
# Reading and validating
# -------------------------
def test_minimal_document():
    doc, warnings = load_scenario(MINIMAL)
    assert warnings == []
    assert [b.id for b in doc.blocks] == ["in", "st", "out"]
    assert doc.analysis.kind == "dc_sweep"
    op = trigger_params(doc.block("st")).op
    assert (op.i_th_high, op.i_th_low) == (350.0, 150.0)


def test_misspelled_key_gets_a_suggestion():
    text = MINIMAL.replace("i_thresh=368pA", "ithreshold=368pA")
    _, diags = read_scenario(text)
    unknown = [d for d in diags if d.code == "E101"]
    assert len(unknown) == 1
    assert "i_thresh" in unknown[0].message
    assert unknown[0].line == 4


def test_width_not_below_threshold():
    assert "E201" in _fails_with(MINIMAL.replace("i_width=216pA", "i_width=400pA"))


def test_spikes_too_close():
    text = MINIMAL + "stimulus in spikes events=10ms:+,12ms:-\n"
    assert "E203" in _fails_with(text)


def test_undeclared_block():
    text = MINIMAL.replace("net out <- st", "net out <- st\nnet nowhere <- st")
    assert "E200" in _fails_with(text)


def test_every_error_is_reported():
    text = MINIMAL.replace("i_width=216pA", "i_width=400pA").replace("steps=200", "steps=3")
    text += "stimulus in constant value=10\n"
    codes = _fails_with(text)
    assert {"E201", "E202", "E102"} <= set(codes)


def test_missing_version_and_duplicates():
    text = MINIMAL.replace("version 1\n", "").replace("block out probe", "block out probe\nblock out probe")
    codes = _fails_with(text)
    assert "E104" in codes and "E103" in codes


def test_unsupported_version():
    assert "E105" in _fails_with(MINIMAL.replace("version 1", "version 2"))


def test_cycle_is_reported():
    text = MINIMAL.replace("net st <- in", "net st <- in out2\nblock out2 heaviside threshold=10pA gain=5pA\nnet out2 <- st")
    assert "E205" in _fails_with(text)


def test_unused_block_is_a_warning():
    _, warnings = load_scenario(MINIMAL.replace("block out probe", "block out probe\nblock spare heaviside threshold=10pA gain=5pA\nnet spare <- in"))
    assert _codes(warnings) == ["W300"]


# -------------------------
# Canonical form
# -------------------------
CANONICAL = [
    MINIMAL.replace("# a lone trigger\n", ""),
    """\
version 1
block in source
block st schmitt i_gain=486pA i_thresh=368pA i_width=216pA cal=ideal tau=159us coupling=0.5
block out probe
net st <- in
net out <- st
stimulus in triangle lo=0pA hi=500pA period=200ms cycles=2
analysis transient t_stop=400ms save_every=10
seed 3
""",
    """\
version 1
block a source
block b source
stimulus a spikes events=10ms:+,40ms:- pulse=5ms
stimulus b spikes events=20ms:+
analysis gate kind=xor mode=ideal
""",
    """\
version 1
block in source
block st schmitt i_gain=486pA i_thresh=368pA i_width=216pA
block out probe
net st <- in
net out <- st
stimulus in pwl points=0s:0pA,10ms:500pA,20ms:0pA
analysis monte_carlo sigma=10pA runs=50 steps=100
seed 7
""",
]


@pytest.mark.parametrize("text", CANONICAL)
def test_canonical_documents_round_trip(text):
    doc = parse_scenario(text)
    assert format_scenario(doc) == text
    assert parse_scenario(format_scenario(doc)) == doc


def test_formatting_drops_comments_and_reorders():
    doc = parse_scenario(MINIMAL.replace("block out probe\n", "") + "block out probe\n")
    lines = format_scenario(doc).splitlines()
    assert lines[0] == "version 1"
    assert lines.index("block out probe") < lines.index("net st <- in")
    assert not any(line.startswith("#") for line in lines)


TOKEN_WORDS = [
    "version", "1", "2", "block", "net", "stimulus", "analysis", "seed", "<-", "in", "st", "out",
    "source", "schmitt", "inv_schmitt", "heaviside", "probe", "constant", "step", "triangle", "pwl", "spikes",
    "dc_sweep", "transient", "gate", "i_gain=486pA", "i_thresh=368pA", "i_width=216pA", "i_width=400pA",
    "value=250pA", "value=-3pA", "lo=0pA", "hi=500pA", "period=0s", "period=20ms", "cycles=3", "t_stop=1ms",
    "events=10ms:+,11ms:-", "events=", "points=1s:0pA,0s:1pA", "threshold=750pA", "gain=500pA", "k=0/pA",
    "tau=0s", "steps=2", "kind=xor", "=", "#", "x=1", "1e999pA", "steps=1e3",
]
TOKENS = st.sampled_from(TOKEN_WORDS)


@settings(max_examples=300, deadline=None)
@given(st.lists(st.lists(TOKENS, min_size=1, max_size=6).map(" ".join), max_size=12).map("\n".join))
def test_reader_and_validator_never_crash(text):
    try:
        doc, warnings = load_scenario(text)
    except ScenarioError as e:
        assert e.diagnostics
        return
    assert all(not d.is_error for d in warnings)


@settings(max_examples=300, deadline=None)
@given(st.text())
def test_reader_accepts_any_text(text):
    doc, diags = read_scenario(text)
    validate_scenario(doc)
    for d in diags:
        assert d.line >= 1 and d.col >= 1


# -------------------------
# Building and running
# -------------------------
def test_build_and_run_dc_sweep():
    doc, _ = load_scenario(MINIMAL)
    network, stimuli = build_from_scenario(doc)
    assert network.order[0] == "in"
    assert stimuli == {}
    result = run_scenario(doc)
    assert result.payload.i_th_high == pytest.approx(350.0, abs=0.01)


def test_run_transient_scenario():
    text = MINIMAL.replace(
        "analysis dc_sweep lo=0pA hi=500pA steps=200",
        "stimulus in step before=0pA after=400pA at=1ms\nanalysis transient t_stop=3ms",
    )
    doc, _ = load_scenario(text)
    trace = run_scenario(doc).payload
    assert isinstance(trace, Trace)
    assert trace.series("out")[-1] == pytest.approx(500.0, abs=1.0)


# -------------------------
# Serialization
# -------------------------
def test_metrics_json_key_order():
    metrics = HysteresisMetrics(350.0, 150.0, 200.0, 500.0, True)
    assert list(json.loads(serialize_results(metrics, "json"))) == [
        "i_th_high_pA", "i_th_low_pA", "hyst_width_pA", "high_level_pA", "bistable",
    ]


def test_trace_csv_layout():
    trace = Trace(np.array([0.0, 1e-3]), {"out": np.array([0.0, 500.0]), "iin": np.array([1.0 / 3.0, 2.0])})
    rows = list(csv.reader(io.StringIO(serialize_results(trace, "csv").decode())))
    assert rows[0] == ["time_s", "out", "iin"]
    assert rows[1] == ["0.000000000", "0.00", "0.33"]
    assert len(rows) == 3


def test_unset_metrics_serialize_as_null():
    data = json.loads(serialize_results(HysteresisMetrics.unset(), "json"))
    assert data["i_th_high_pA"] is None and data["bistable"] is False


# -------------------------
# Golden corpus
# -------------------------
def _trigger_doc(analysis: str, keys: str = "", stimulus: str = "", seed: str = "") -> str:
    return (
        "version 1\n"
        "block in source\n"
        f"block st schmitt i_gain=486pA i_thresh=368pA i_width=216pA{keys}\n"
        "block out probe\n"
        "net st <- in\n"
        "net out <- st\n"
        f"{stimulus}"
        f"analysis {analysis}\n"
        f"{seed}"
    )


def _gate_doc(analysis: str, a: str = "events=10ms:+,40ms:-", b: str = "events=20ms:+") -> str:
    return (
        "version 1\n"
        "block a source\n"
        "block b source\n"
        f"stimulus a spikes {a}\n"
        f"stimulus b spikes {b}\n"
        f"analysis {analysis}\n"
    )


GOLDEN = [
    _trigger_doc("dc_sweep lo=0pA hi=500pA"),
    _trigger_doc("dc_sweep lo=0pA hi=0.5nA steps=400 model=smooth"),
    _trigger_doc("dc_sweep source=in probe=out lo=0pA hi=500pA steps=10", " cal=ideal"),
    _trigger_doc("dc_sweep lo=0pA hi=500pA", " gain_offset=10pA thresh_offset=-12pA width_offset=-8pA"),
    _trigger_doc("transient t_stop=5ms dt=2us", " k=20/pA tau=100us"),
    _trigger_doc("transient t_stop=10ms save_every=5", " tau_fb=100us tau_out=200us coupling=0.8",
                 "stimulus in step before=0pA after=400pA at=2ms\n"),
    _trigger_doc("dc_sweep lo=0pA hi=500pA", " drift=0.5pA/C temp=85C"),
    _trigger_doc("transient t_stop=200ms save_every=100", stimulus="stimulus in triangle lo=0pA hi=500pA period=200ms\n"),
    _trigger_doc("transient t_stop=700ms save_every=100",
                 stimulus="stimulus in triangle lo=0pA hi=500pA period=200ms cycles=3 delay=10ms\n"),
    _trigger_doc("transient t_stop=10ms", stimulus="stimulus in pwl points=0s:0pA,5ms:500pA,10ms:0pA\n"),
    _trigger_doc("transient t_stop=2ms", stimulus="stimulus in constant value=250pA\n"),
    _trigger_doc("transient t_stop=3ms dt=5us save_every=2",
                 stimulus="stimulus in step before=0pA after=400pA at=1ms\n"),
    _trigger_doc("monte_carlo sigma=10pA runs=100 steps=50 workers=2", seed="seed 42\n"),
    _trigger_doc("monte_carlo target=st", seed="seed 0\n"),
    _trigger_doc("monte_carlo sigma=0pA runs=1"),
    _trigger_doc("tunability knob=gain"),
    _trigger_doc("tunability knob=width target=st lo=20pA hi=300pA steps=14"),
    _trigger_doc("tunability knob=thresh lo=100pA hi=400pA"),
    _gate_doc("gate kind=and mode=ideal"),
    _gate_doc("gate kind=nor t_stop=100ms",
              a="events=10ms:+,40ms:- pulse=2ms rest=250pA level0=0pA level1=500pA",
              b="events=20ms:- pulse=2ms rest=250pA level0=0pA level1=500pA"),
    _gate_doc("gate kind=xor", a="events=10ms:+,30ms:-,50ms:+", b="events=20ms:-,40ms:+"),
    _gate_doc("gate kind=or mode=calibrated"),
    _gate_doc("gate kind=nand", a="events=10ms:-", b="events=20ms:-"),
    """\
version 1
block in source
block h heaviside threshold=750pA gain=500pA k=2/pA
block y probe
net h <- in
net y <- h
analysis dc_sweep lo=0pA hi=1nA
""",
    """\
version 1
block in source
block bias source
block st schmitt i_gain=486pA i_thresh=368pA i_width=216pA
block out probe
net st <- in bias
net out <- st
stimulus bias constant value=50pA
analysis dc_sweep source=in lo=0pA hi=500pA
""",
    """\
version 1
block in source
block s1 schmitt i_gain=250pA i_thresh=200pA i_width=100pA cal=ideal
block s2 schmitt i_gain=250pA i_thresh=400pA i_width=100pA cal=ideal
block y probe
net s1 <- in
net s2 <- in
net y <- s1 s2
stimulus in triangle lo=0pA hi=500pA period=20ms
analysis transient t_stop=20ms save_every=10
""",
]


# documents that read cleanly but fail validation, with the codes they raise
GOLDEN_INVALID = [
    (_trigger_doc("dc_sweep lo=0pA hi=500pA").replace("i_width=216pA", "i_width=400pA"), ["E201"]),
    (_trigger_doc("transient t_stop=5ms dt=10us"), ["E202"]),
    (_trigger_doc("transient t_stop=100s"), ["E202"]),
    (_trigger_doc("transient t_stop=1000s save_every=1000"), ["E202"]),
    (_trigger_doc("monte_carlo runs=1000000"), ["E202"]),
    (_trigger_doc("dc_sweep lo=0pA hi=500pA steps=1000000"), ["E202"]),
    (_trigger_doc("tunability knob=gain steps=5000"), ["E202"]),
    (_gate_doc("gate kind=and", a="events=10ms:+ pulse=5ms", b="events=20ms:- pulse=4ms"), ["E202"]),
    (_gate_doc("gate kind=and", a="events=1000s:+"), ["E202"]),
    (_trigger_doc("dc_sweep lo=0pA hi=500pA").replace("net out <- st", "net out <- nowhere"),
     ["E200", "E206", "W300"]),
    ("""\
version 1
block in source
block h1 heaviside threshold=10pA gain=5pA
block h2 heaviside threshold=10pA gain=5pA
block out probe
net h1 <- in h2
net h2 <- h1
net out <- h1
analysis dc_sweep lo=0pA hi=500pA
""", ["E205"]),
]


@pytest.mark.parametrize("text", GOLDEN)
def test_golden_documents(text):
    doc = parse_scenario(text)
    assert format_scenario(doc) == text
    assert validate_scenario(doc) == []


@pytest.mark.parametrize("text,codes", GOLDEN_INVALID)
def test_golden_rejections(text, codes):
    doc = parse_scenario(text)
    assert format_scenario(doc) == text
    assert sorted(_codes(validate_scenario(doc))) == codes


def test_seeded_fuzz_corpus():
    rng = np.random.default_rng(2024)
    for _ in range(10_000):
        lines = []
        for _ in range(rng.integers(0, 13)):
            words = rng.choice(TOKEN_WORDS, size=rng.integers(1, 7))
            lines.append(" ".join(str(w) for w in words))
        try:
            _, warnings = load_scenario("\n".join(lines))
        except ScenarioError as e:
            assert e.diagnostics
            continue
        assert all(not d.is_error for d in warnings)


# -------------------------
# Resource limits
# -------------------------
def test_library_limits():
    with pytest.raises(DomainError):
        monte_carlo(runs=MAX_RUNS + 1)
    with pytest.raises(DomainError):
        tunability_sweep("gain", steps=MAX_SET_POINTS + 1)
    with pytest.raises(DomainError):
        dc_hysteresis(SchmittBlockParams(SchmittParams.baseline()), 0.0, 500.0, MAX_SWEEP_STEPS + 1)


def test_transient_run_length_is_capped():
    network = trigger_network(SchmittBlockParams(SchmittParams.baseline()))
    dt = dt_bound(network)
    with pytest.raises(IntegrationError):
        run_transient(network, {}, (MAX_STEPS + 10) * dt, dt)
    with pytest.raises(IntegrationError):
        run_transient(network, {}, (MAX_SAMPLES + 10) * dt, dt)


def test_gate_inputs_must_share_an_encoding():
    doc = parse_scenario(_gate_doc("gate kind=and", a="events=10ms:+ pulse=5ms", b="events=20ms:- pulse=4ms"))
    with pytest.raises(ConfigurationError):
        run_scenario(doc)
