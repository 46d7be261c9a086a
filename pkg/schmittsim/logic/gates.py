from enum import Enum
from itertools import product
from typing import Literal

from ..core.params import Calibration, DynamicsConfig, SchmittParams
from ..graph.blocks import Block, Net
from ..graph.network import Network, build_network
from .encoding import Encoding, Polarity

GateMode = Literal["ideal", "calibrated"]

INPUTS = ("a", "b")


class GateKind(Enum):
    AND = "and"
    OR = "or"
    NAND = "nand"
    NOR = "nor"
    XOR = "xor"


_BOOL = {
    GateKind.AND: lambda x, y: x & y,
    GateKind.OR: lambda x, y: x | y,
    GateKind.NAND: lambda x, y: 1 - (x & y),
    GateKind.NOR: lambda x, y: 1 - (x | y),
    GateKind.XOR: lambda x, y: x ^ y,
}


def truth_table(kind: GateKind | str) -> dict[tuple[Polarity, Polarity], int]:
    fn = _BOOL[GateKind(kind)]
    return {(p, q): fn(p.bit, q.bit) for p, q in product((Polarity.NEG, Polarity.POS), repeat=2)}


def gate_trigger(enc: Encoding, mode: GateMode = "calibrated",
                 dyn: DynamicsConfig | None = None) -> tuple[SchmittParams, Calibration, DynamicsConfig]:
    """Bias set placing the effective thresholds a fifth of the encoding swing
    either side of rest (150/350 pA by default), high level at ``level1``."""
    dyn = dyn or DynamicsConfig()
    width = 0.4 * (enc.level1 - enc.level0)
    th_high = enc.rest + 0.5 * width
    if mode == "ideal":
        cal = Calibration.ideal()
    elif mode == "calibrated":
        cal = Calibration()
    else:
        raise ValueError(f"unknown gate mode {mode!r}")
    params = SchmittParams(enc.level1 - cal.gain_offset, th_high - cal.thresh_offset, width - cal.width_offset)
    return params, cal, dyn


def _front_end(enc: Encoding, mode: GateMode, dyn: DynamicsConfig | None) -> tuple[list[Block], list[Net]]:
    params, cal, dyn = gate_trigger(enc, mode, dyn)
    blocks: list[Block] = []
    nets: list[Net] = []
    for name in INPUTS:
        blocks += [
            Block.source(name),
            Block.trigger(f"st_{name}", params, cal, dyn),
            Block.trigger(f"ist_{name}", params, cal, dyn, inverted=True),
        ]
        nets += [Net(f"st_{name}", name), Net(f"ist_{name}", name)]
    return blocks, nets


def _back_end(kind: GateKind, enc: Encoding, k: float, out: str, prefix: str = "") -> tuple[list[Block], list[Net]]:
    g = enc.level1
    hi, lo = 1.5 * g, 0.5 * g
    h = f"{prefix}h"
    match kind:
        case GateKind.AND:
            stages = [(h, hi, ("st_a", "st_b"))]
        case GateKind.NOR:
            stages = [(h, hi, ("ist_a", "ist_b"))]
        case GateKind.OR:
            stages = [(h, lo, ("st_a", "st_b"))]
        case GateKind.NAND:
            stages = [(h, lo, ("ist_a", "ist_b"))]
        case GateKind.XOR:
            stages = [(f"{h}1", hi, ("st_a", "ist_b")), (f"{h}2", hi, ("st_b", "ist_a"))]
    blocks = [Block.threshold(bid, th, g, k) for bid, th, _ in stages]
    nets = [Net(bid, drivers) for bid, _, drivers in stages]
    blocks.append(Block.probe(out))
    nets.append(Net(out, [bid for bid, _, _ in stages]))
    return blocks, nets


def make_gate(kind: GateKind | str, enc: Encoding | None = None, mode: GateMode = "calibrated",
              dyn: DynamicsConfig | None = None) -> Network:
    """Two-input spike gate: inputs ``a``/``b``, output probe ``y``."""
    kind = GateKind(kind)
    enc = enc or Encoding()
    blocks, nets = _front_end(enc, mode, dyn)
    k = (dyn or DynamicsConfig()).steepness_k
    b, n = _back_end(kind, enc, k, "y")
    return build_network(blocks + b, nets + n)


def make_half_adder(enc: Encoding | None = None, mode: GateMode = "calibrated",
                    dyn: DynamicsConfig | None = None) -> Network:
    """XOR (probe ``sum``) and AND (probe ``carry``) on one shared front end."""
    enc = enc or Encoding()
    blocks, nets = _front_end(enc, mode, dyn)
    k = (dyn or DynamicsConfig()).steepness_k
    for kind, out, prefix in ((GateKind.XOR, "sum", "s_"), (GateKind.AND, "carry", "c_")):
        b, n = _back_end(kind, enc, k, out, prefix)
        blocks += b
        nets += n
    return build_network(blocks, nets)
