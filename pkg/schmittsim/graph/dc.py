import math
from dataclasses import dataclass
from typing import Literal, Mapping

from scipy.special import expit

from ..core.device import SchmittState, complement, ideal_step_op, smooth_settle
from ..errors import DomainError, MissingSourceError
from .blocks import BlockKind
from .network import Network

Model = Literal["ideal", "smooth"]


@dataclass(frozen=True)
class DcResult:
    currents: dict[str, float]          # output current of every block (pA)
    states: dict[str, SchmittState]     # trigger states after evaluation

    def __getitem__(self, block_id: str) -> float:
        return self.currents[block_id]


def initial_states(network: Network, undefined: bool = False) -> dict[str, SchmittState]:
    return {bid: SchmittState.low(undefined) for bid in network.triggers}


def eval_dc(network: Network, sources: Mapping[str, float],
            states: Mapping[str, SchmittState] | None = None,
            model: Model = "ideal") -> DcResult:
    """Evaluate the network for held source currents.

    Triggers use the discrete state machine (``ideal``) or the stable
    equilibrium continuous with their prior state (``smooth``).
    """
    if model not in ("ideal", "smooth"):
        raise ValueError(f"unknown model {model!r}")

    missing = [s for s in network.sources if s not in sources]
    if missing:
        raise MissingSourceError(f"no value for source(s): {', '.join(missing)}", missing)

    prior = dict(initial_states(network))
    if states:
        prior.update(states)

    out: dict[str, float] = {}
    new_states: dict[str, SchmittState] = {}

    for bid in network.order:
        block = network.blocks[bid]
        i_in = sum(out[d] for d in network.inputs[bid])

        match block.kind:
            case BlockKind.SOURCE:
                value = float(sources[bid])
                if not math.isfinite(value) or value < 0:
                    raise DomainError(f"source {bid}: current must be finite and nonnegative, got {value}")
                out[bid] = value

            case BlockKind.SCHMITT | BlockKind.INV_SCHMITT:
                op = block.schmitt.op
                if model == "ideal":
                    state, y = ideal_step_op(op, i_in, prior[bid])
                else:
                    state = smooth_settle(op, block.schmitt.dyn.steepness_k, i_in, prior[bid])
                    y = max(0.0, state.i_out)
                new_states[bid] = state
                out[bid] = complement(y, op.high_level) if block.kind is BlockKind.INV_SCHMITT else y

            case BlockKind.HEAVISIDE:
                hp = block.heaviside
                if model == "ideal":
                    out[bid] = hp.gain if i_in > hp.threshold else 0.0
                else:
                    out[bid] = float(hp.gain * expit(hp.k * (i_in - hp.threshold)))

            case BlockKind.PROBE:
                out[bid] = i_in

    return DcResult(out, new_states)
