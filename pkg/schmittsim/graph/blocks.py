import math
from dataclasses import dataclass, field
from enum import Enum

from ..core.params import Calibration, DynamicsConfig, Operating, SchmittParams, operating_point
from ..errors import ConfigurationError


class BlockKind(Enum):
    SOURCE = "source"
    SCHMITT = "schmitt"
    INV_SCHMITT = "inv_schmitt"
    HEAVISIDE = "heaviside"
    PROBE = "probe"


TRIGGER_KINDS = (BlockKind.SCHMITT, BlockKind.INV_SCHMITT)


@dataclass(frozen=True)
class HeavisideParams:
    threshold: float   # pA
    gain: float        # pA
    k: float = 1.0     # 1/pA, steepness used by the smooth evaluation

    def __post_init__(self):
        if not (math.isfinite(self.threshold) and math.isfinite(self.gain) and math.isfinite(self.k)):
            raise ConfigurationError("heaviside parameters must be finite")
        if self.gain < 0:
            raise ConfigurationError(f"heaviside gain must be nonnegative, got {self.gain} pA")
        if self.k <= 0:
            raise ConfigurationError(f"heaviside steepness must be strictly positive, got {self.k}")


@dataclass(frozen=True)
class SchmittBlockParams:
    params: SchmittParams
    cal: Calibration = field(default_factory=Calibration)
    dyn: DynamicsConfig = field(default_factory=DynamicsConfig)

    def __post_init__(self):
        # raises on an invalid effective configuration
        operating_point(self.params, self.cal, self.dyn)

    @property
    def op(self) -> Operating:
        return operating_point(self.params, self.cal, self.dyn)


@dataclass(frozen=True)
class Block:
    id: str
    kind: BlockKind
    schmitt: SchmittBlockParams | None = None
    heaviside: HeavisideParams | None = None

    def __post_init__(self):
        if not self.id or any(c.isspace() for c in self.id):
            raise ConfigurationError(f"invalid block id {self.id!r}")
        if self.kind in TRIGGER_KINDS and self.schmitt is None:
            raise ConfigurationError(f"block {self.id}: {self.kind.value} needs trigger parameters")
        if self.kind is BlockKind.HEAVISIDE and self.heaviside is None:
            raise ConfigurationError(f"block {self.id}: heaviside needs threshold and gain")
        if self.kind not in TRIGGER_KINDS and self.schmitt is not None:
            raise ConfigurationError(f"block {self.id}: trigger parameters on a {self.kind.value} block")
        if self.kind is not BlockKind.HEAVISIDE and self.heaviside is not None:
            raise ConfigurationError(f"block {self.id}: heaviside parameters on a {self.kind.value} block")

    # -------------------------
    # Constructors
    # -------------------------
    @classmethod
    def source(cls, id: str) -> "Block":
        return cls(id, BlockKind.SOURCE)

    @classmethod
    def probe(cls, id: str) -> "Block":
        return cls(id, BlockKind.PROBE)

    @classmethod
    def trigger(cls, id: str, params: SchmittParams, cal: Calibration | None = None,
                dyn: DynamicsConfig | None = None, inverted: bool = False) -> "Block":
        bp = SchmittBlockParams(params, cal or Calibration(), dyn or DynamicsConfig())
        return cls(id, BlockKind.INV_SCHMITT if inverted else BlockKind.SCHMITT, schmitt=bp)

    @classmethod
    def threshold(cls, id: str, threshold: float, gain: float, k: float = 1.0) -> "Block":
        return cls(id, BlockKind.HEAVISIDE, heaviside=HeavisideParams(threshold, gain, k))

    @property
    def is_trigger(self) -> bool:
        return self.kind in TRIGGER_KINDS


@dataclass(frozen=True)
class Net:
    """Drivers whose output currents sum into ``target``'s input."""
    target: str
    drivers: tuple[str, ...]

    def __init__(self, target: str, drivers):
        if isinstance(drivers, str):
            drivers = (drivers,)
        object.__setattr__(self, "target", target)
        object.__setattr__(self, "drivers", tuple(drivers))
