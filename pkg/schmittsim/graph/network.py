import heapq
import logging
from dataclasses import dataclass
from types import MappingProxyType
from typing import Iterable, Mapping

from ..errors import (
    ConfigurationError,
    CycleError,
    DanglingNetError,
    DuplicateIdError,
    NetworkError,
)
from .blocks import Block, BlockKind, Net

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Network:
    blocks: Mapping[str, Block]
    inputs: Mapping[str, tuple[str, ...]]
    order: tuple[str, ...]

    def of_kind(self, *kinds: BlockKind) -> list[str]:
        return [bid for bid in self.order if self.blocks[bid].kind in kinds]

    @property
    def sources(self) -> list[str]:
        return self.of_kind(BlockKind.SOURCE)

    @property
    def probes(self) -> list[str]:
        return self.of_kind(BlockKind.PROBE)

    @property
    def triggers(self) -> list[str]:
        return self.of_kind(BlockKind.SCHMITT, BlockKind.INV_SCHMITT)

    def __len__(self):
        return len(self.blocks)


def topological_order(inputs: Mapping[str, Iterable[str]]) -> tuple[tuple[str, ...], list[str]]:
    """Kahn's algorithm with ties broken by id.

    Returns the order and the blocks left on a cycle, sorted; the second is
    empty for an acyclic graph. Blocks that only hang off a cycle are not
    reported.
    """
    fanout: dict[str, set[str]] = {bid: set() for bid in inputs}
    indegree: dict[str, int] = {}
    for bid, drivers in inputs.items():
        unique = set(drivers)
        indegree[bid] = len(unique)
        for d in unique:
            fanout.setdefault(d, set()).add(bid)

    ready = [bid for bid, n in indegree.items() if n == 0]
    heapq.heapify(ready)
    order = []
    while ready:
        bid = heapq.heappop(ready)
        order.append(bid)
        for nxt in fanout[bid]:
            indegree[nxt] -= 1
            if indegree[nxt] == 0:
                heapq.heappush(ready, nxt)

    stuck = set(inputs) - set(order)
    pruned = True
    while pruned:
        tails = {bid for bid in stuck if not fanout[bid] & stuck}
        stuck -= tails
        pruned = bool(tails)
    return tuple(order), sorted(stuck)


def build_network(blocks: Iterable[Block], nets: Iterable[Net]) -> Network:
    """Validate blocks and nets and fix a topological evaluation order.

    Several drivers on one input add (current summation); several nets
    targeting the same block merge.
    """
    blocks = list(blocks)
    nets = list(nets)

    by_id: dict[str, Block] = {}
    dupes = []
    for b in blocks:
        if not isinstance(b, Block):
            raise ConfigurationError(f"not a block: {b!r}")
        if b.id in by_id:
            dupes.append(b.id)
        by_id[b.id] = b
    if dupes:
        raise DuplicateIdError(f"duplicate block id(s): {', '.join(sorted(set(dupes)))}", sorted(set(dupes)))

    # -------------------------
    # Nets
    # -------------------------
    inputs: dict[str, list[str]] = {bid: [] for bid in by_id}
    missing = []
    for net in nets:
        for ref in (net.target, *net.drivers):
            if ref not in by_id and ref not in missing:
                missing.append(ref)
    if missing:
        raise DanglingNetError(f"net references unknown block(s): {', '.join(missing)}", missing)

    for net in nets:
        if by_id[net.target].kind is BlockKind.SOURCE:
            raise NetworkError(f"source {net.target} cannot be driven", [net.target])
        if not net.drivers:
            raise NetworkError(f"net into {net.target} has no drivers", [net.target])
        inputs[net.target].extend(net.drivers)

    undriven = [bid for bid, b in by_id.items() if b.kind is not BlockKind.SOURCE and not inputs[bid]]
    if undriven:
        raise NetworkError(f"undriven input(s): {', '.join(sorted(undriven))}", sorted(undriven))

    order, cyclic = topological_order(inputs)
    if cyclic:
        raise CycleError(f"cycle detected through block(s): {', '.join(cyclic)}", cyclic)

    log.debug("network built: %d blocks, order %s", len(order), " -> ".join(order))

    return Network(
        blocks=MappingProxyType(dict(by_id)),
        inputs=MappingProxyType({bid: tuple(sorted(d)) for bid, d in inputs.items()}),
        order=tuple(order),
    )
