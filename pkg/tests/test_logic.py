import pytest

from schmittsim.core.params import SchmittParams
from schmittsim.errors import ConfigurationError, SeparationError, StimulusError
from schmittsim.graph.dc import eval_dc
from schmittsim.logic.encoding import Encoding, Polarity, SpikeEvent, SpikeProgram, min_separation, render_stimulus
from schmittsim.logic.gates import GateKind, gate_trigger, make_gate, make_half_adder, truth_table
from schmittsim.logic.harness import (
    check_truth_table,
    half_adder,
    last_polarities,
    polarity_walk,
    run_gate,
)

ENC = Encoding()


# -------------------------
# Encoding
# -------------------------
def test_decode_bands():
    assert (ENC.low_band, ENC.high_band) == (125.0, 375.0)
    assert ENC.decode(0.0) == 0
    assert ENC.decode(500.0) == 1
    assert ENC.decode(250.0) is None


@pytest.mark.parametrize("kwargs", [{"rest": 0.0}, {"level1": 200.0}, {"pulse_width": 0.0}, {"level0": -1.0}])
def test_invalid_encoding(kwargs):
    with pytest.raises(ConfigurationError):
        Encoding(**kwargs)


def test_render_stimulus_pulses():
    program = SpikeProgram.of((0.01, "+"), (0.03, "-"))
    w = render_stimulus(program, ENC)
    assert w.value(0.0) == 250.0
    assert w.value(0.012) == 500.0
    assert w.value(0.016) == 250.0
    assert w.value(0.032) == 0.0
    assert w.value(0.04) == 250.0


def test_min_separation():
    assert min_separation(ENC, 159e-6) == pytest.approx(6.59e-3)


def test_spikes_too_close():
    program = SpikeProgram.of((0.010, "+"), (0.012, "-"))
    with pytest.raises(SeparationError) as e:
        program.validate(ENC, 159e-6)
    assert e.value.first == SpikeEvent(0.010, Polarity.POS)
    assert e.value.second == SpikeEvent(0.012, Polarity.NEG)


def test_spikes_out_of_order():
    with pytest.raises(StimulusError):
        SpikeProgram.of((0.03, "+"), (0.01, "-")).validate(ENC, 159e-6)


def test_spike_event_text():
    assert str(SpikeEvent(0.01, Polarity.POS)) == "10ms:+"


# -------------------------
# Gate construction
# -------------------------
def test_truth_tables():
    pos, neg = Polarity.POS, Polarity.NEG
    assert truth_table("and")[(pos, pos)] == 1
    assert truth_table("nor")[(neg, neg)] == 1
    assert truth_table("xor")[(pos, neg)] == 1
    assert truth_table("xor")[(pos, pos)] == 0
    assert truth_table(GateKind.NAND)[(pos, pos)] == 0


def test_gate_trigger_modes():
    params, cal, _ = gate_trigger(ENC, "calibrated")
    assert params == SchmittParams(486.0, 368.0, 216.0)
    params, cal, _ = gate_trigger(ENC, "ideal")
    assert params == SchmittParams(500.0, 350.0, 200.0) and cal.is_ideal


@pytest.mark.parametrize("kind,stages", [("and", 1), ("or", 1), ("nand", 1), ("nor", 1), ("xor", 2)])
def test_gate_networks(kind, stages):
    network = make_gate(kind)
    assert network.sources == ["a", "b"]
    assert network.probes == ["y"]
    assert len(network.triggers) == 4
    assert len([b for b in network.blocks if b.startswith("h")]) == stages


def test_half_adder_shares_the_front_end():
    network = make_half_adder()
    assert len(network.triggers) == 4
    assert set(network.probes) == {"sum", "carry"}


# -------------------------
# Transient truth tables
# -------------------------
def test_polarity_walk_visits_every_combination():
    a, b = polarity_walk()
    times = sorted(ev.time for ev in (*a, *b))
    seen = {last_polarities((a, b), t) for t in times[1:]}
    assert seen == set(truth_table("and"))


@pytest.mark.parametrize("mode", ["ideal", "calibrated"])
@pytest.mark.parametrize("kind", [k.value for k in GateKind])
def test_truth_table_holds(kind, mode):
    run, rows = check_truth_table(kind, mode=mode)
    assert len(rows) == 4
    for row in rows:
        assert row.ok, row
    # the first spike leaves b undefined
    assert run.samples[0].value is None


@pytest.mark.parametrize("kind", ["and", "or", "xor"])
def test_gates_are_symmetric(kind):
    a, b = polarity_walk()
    assert run_gate(kind, (a, b)).values == run_gate(kind, (b, a)).values


@pytest.mark.parametrize("kind,inverse", [("nand", "and"), ("nor", "or")])
def test_inverted_gates_complement(kind, inverse):
    programs = polarity_walk()
    ours = run_gate(kind, programs).values
    theirs = run_gate(inverse, programs).values
    for x, y in zip(ours, theirs):
        assert (x is None and y is None) or x == 1 - y


def test_half_adder_matches_xor_and_and():
    programs = polarity_walk()
    total, carry = half_adder(programs)
    assert total.values == run_gate("xor", programs).values
    assert carry.values == run_gate("and", programs).values
    assert total.final == 1 and carry.final == 0


@pytest.mark.slow
@pytest.mark.parametrize("kind", [k.value for k in GateKind])
def test_outputs_persist_through_a_long_rest(kind):
    _, rows = check_truth_table(kind, rest=10.0)
    assert all(row.ok for row in rows)


# -------------------------
# Held-level and timing behavior
# -------------------------
@pytest.mark.parametrize("mode", ["ideal", "calibrated"])
@pytest.mark.parametrize("kind", [k.value for k in GateKind])
def test_gates_in_dc(kind, mode):
    network = make_gate(kind, ENC, mode)
    for (p, q), bit in truth_table(kind).items():
        res = eval_dc(network, {"a": ENC.level(p), "b": ENC.level(q)})
        assert res["y"] == bit * ENC.level1, (p, q)


def test_xor_in_dc():
    network = make_gate("xor")
    assert eval_dc(network, {"a": 500.0, "b": 0.0})["y"] == 500.0
    assert eval_dc(network, {"a": 500.0, "b": 500.0})["y"] == 0.0


@pytest.mark.parametrize("kind", ["and", "xor", "nor"])
def test_decoding_does_not_depend_on_the_start_time(kind):
    early = run_gate(kind, polarity_walk(start=0.01))
    late = run_gate(kind, polarity_walk(start=0.03))
    assert early.values == late.values
    assert [s.held for s in early.samples] == [s.held for s in late.samples]


@pytest.mark.parametrize("polarity", ["+", "-"])
@pytest.mark.parametrize("kind", [k.value for k in GateKind])
def test_repeated_spikes_leave_the_output_unchanged(kind, polarity):
    b = SpikeProgram.of((0.02, "+"))
    once = run_gate(kind, (SpikeProgram.of((0.01, polarity)), b))
    twice = run_gate(kind, (SpikeProgram.of((0.01, polarity), (0.03, polarity)), b))
    assert twice.values[:2] == once.values
    assert twice.final == once.final
    assert all(s.held for s in twice.samples)
