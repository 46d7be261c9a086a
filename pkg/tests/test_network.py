import random

import pytest

from schmittsim.core.device import Branch
from schmittsim.core.params import SchmittParams
from schmittsim.errors import (
    CycleError,
    DanglingNetError,
    DomainError,
    DuplicateIdError,
    MissingSourceError,
    NetworkError,
)
from schmittsim.graph.blocks import Block, BlockKind, Net
from schmittsim.graph.dc import eval_dc
from schmittsim.graph.network import build_network


def _trigger_chain():
    blocks = [
        Block.source("in"),
        Block.trigger("st", SchmittParams.baseline()),
        Block.trigger("ist", SchmittParams.baseline(), inverted=True),
        Block.probe("out"),
        Block.probe("nout"),
    ]
    nets = [Net("st", "in"), Net("ist", "in"), Net("out", "st"), Net("nout", "ist")]
    return blocks, nets


def test_order_is_topological():
    network = build_network(*_trigger_chain())
    pos = {bid: i for i, bid in enumerate(network.order)}
    for bid, drivers in network.inputs.items():
        for d in drivers:
            assert pos[d] < pos[bid]
    assert network.sources == ["in"]
    assert set(network.probes) == {"out", "nout"}
    assert network.blocks["ist"].kind is BlockKind.INV_SCHMITT


def test_order_does_not_depend_on_declaration_order():
    blocks, nets = _trigger_chain()
    expected = build_network(blocks, nets).order
    rng = random.Random(7)
    for _ in range(10):
        rng.shuffle(blocks)
        rng.shuffle(nets)
        assert build_network(blocks, nets).order == expected


def test_duplicate_ids():
    blocks, nets = _trigger_chain()
    with pytest.raises(DuplicateIdError) as e:
        build_network(blocks + [Block.probe("out")], nets)
    assert e.value.ids == ("out",)


def test_dangling_net():
    blocks, nets = _trigger_chain()
    with pytest.raises(DanglingNetError) as e:
        build_network(blocks, nets + [Net("out", "nowhere")])
    assert "nowhere" in e.value.ids


def test_cycle():
    blocks = [Block.source("in"), Block.threshold("h1", 100.0, 500.0), Block.threshold("h2", 100.0, 500.0)]
    nets = [Net("h1", ["in", "h2"]), Net("h2", "h1")]
    with pytest.raises(CycleError) as e:
        build_network(blocks, nets)
    assert set(e.value.ids) == {"h1", "h2"}


def test_undriven_input():
    blocks, nets = _trigger_chain()
    with pytest.raises(NetworkError):
        build_network(blocks + [Block.probe("spare")], nets)


def test_source_cannot_be_driven():
    blocks, nets = _trigger_chain()
    with pytest.raises(NetworkError):
        build_network(blocks, nets + [Net("in", "st")])


# -------------------------
# DC evaluation
# -------------------------
def test_currents_sum_on_a_net():
    network = build_network(
        [Block.source("a"), Block.source("b"), Block.probe("y")],
        [Net("y", ["a", "b"])],
    )
    assert eval_dc(network, {"a": 100.0, "b": 150.0})["y"] == 250.0


def test_nets_into_one_target_merge():
    network = build_network(
        [Block.source("a"), Block.source("b"), Block.probe("y")],
        [Net("y", "a"), Net("y", "b")],
    )
    assert eval_dc(network, {"a": 1.0, "b": 2.0})["y"] == 3.0


def test_trigger_and_complement_in_dc():
    network = build_network(*_trigger_chain())
    res = eval_dc(network, {"in": 0.0})
    assert res["out"] == 0.0 and res["nout"] == 500.0

    res = eval_dc(network, {"in": 400.0}, res.states)
    assert res["out"] == 500.0 and res["nout"] == 0.0
    assert res.states["st"].branch is Branch.HIGH

    # held in the band
    res = eval_dc(network, {"in": 250.0}, res.states)
    assert res["out"] == 500.0 and res["nout"] == 0.0


def test_smooth_dc_tracks_the_prior_branch():
    network = build_network(*_trigger_chain())
    low = eval_dc(network, {"in": 250.0}, model="smooth")
    assert low["out"] == pytest.approx(0.0, abs=0.01)
    high = eval_dc(network, {"in": 400.0}, model="smooth")
    held = eval_dc(network, {"in": 250.0}, high.states, model="smooth")
    assert held["out"] == pytest.approx(500.0, abs=0.1)


def test_threshold_block_sharp_and_smooth():
    network = build_network(
        [Block.source("a"), Block.threshold("h", 750.0, 500.0), Block.probe("y")],
        [Net("h", "a"), Net("y", "h")],
    )
    assert eval_dc(network, {"a": 750.0})["y"] == 0.0
    assert eval_dc(network, {"a": 751.0})["y"] == 500.0
    assert eval_dc(network, {"a": 750.0}, model="smooth")["y"] == pytest.approx(250.0)


def test_missing_and_negative_sources():
    network = build_network(*_trigger_chain())
    with pytest.raises(MissingSourceError):
        eval_dc(network, {})
    with pytest.raises(DomainError):
        eval_dc(network, {"in": -1.0})


@pytest.mark.parametrize("model", ["ideal", "smooth"])
@pytest.mark.parametrize("a,b", [(0.0, 0.0), (100.0, 300.0), (300.0, 100.0), (200.0, 200.0), (400.0, 0.0), (50.0, 150.0)])
def test_threshold_blocks_sum_linearly(model, a, b):
    network = build_network(
        [
            Block.source("a"), Block.source("b"),
            Block.threshold("ha", 150.0, 300.0), Block.threshold("hb", 150.0, 200.0),
            Block.threshold("hab", 250.0, 500.0),
            Block.probe("y"), Block.probe("z"),
        ],
        [Net("ha", "a"), Net("hb", "b"), Net("hab", ["a", "b"]), Net("y", ["ha", "hb"]), Net("z", "hab")],
    )
    res = eval_dc(network, {"a": a, "b": b}, model=model)
    # output currents add on a net
    assert res["y"] == pytest.approx(res["ha"] + res["hb"])
    # a shared input sees only the summed current
    lumped = eval_dc(network, {"a": a + b, "b": 0.0}, model=model)
    assert res["z"] == pytest.approx(lumped["z"])
