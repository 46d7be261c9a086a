import math
import re
from dataclasses import dataclass

# unit suffix -> (dimension, scale to base unit)
# base units: pA, s, 1/pA, °C, pA/°C
UNITS = {
    "pA": ("current", 1.0),
    "nA": ("current", 1e3),
    "uA": ("current", 1e6),
    "s": ("time", 1.0),
    "ms": ("time", 1e-3),
    "us": ("time", 1e-6),
    "/pA": ("steepness", 1.0),
    "C": ("temperature", 1.0),
    "pA/C": ("drift", 1.0),
}

DIMENSION_UNITS = {}
for _suffix, (_dim, _) in UNITS.items():
    DIMENSION_UNITS.setdefault(_dim, []).append(_suffix)

_NUMBER = re.compile(r"^([+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)([A-Za-z/]*)$")
_COUNT = re.compile(r"^\d{1,12}$")


class UnitError(ValueError):
    def __init__(self, message: str, code: str = "E102"):
        self.code = code
        super().__init__(message)


@dataclass(frozen=True)
class Quantity:
    magnitude: float
    unit: str

    @property
    def dimension(self) -> str:
        return UNITS[self.unit][0]

    @property
    def base(self) -> float:
        return self.magnitude * UNITS[self.unit][1]

    def __str__(self):
        return f"{format_number(self.magnitude)}{self.unit}"


def format_number(x: float) -> str:
    """Shortest text that parses back to exactly ``x``."""
    if x == int(x) and abs(x) < 1e15:
        return str(int(x))
    return repr(float(x))


def split_number(text: str) -> tuple[float, str]:
    m = _NUMBER.match(text)
    if not m:
        raise UnitError(f"malformed number {text!r}", code="E100")
    value = float(m.group(1))
    if not math.isfinite(value):
        raise UnitError(f"number out of range: {text!r}", code="E202")
    return value, m.group(2)


def parse_quantity(text: str, dimension: str) -> Quantity:
    value, suffix = split_number(text)
    allowed = DIMENSION_UNITS[dimension]
    if not suffix:
        raise UnitError(f"{text!r} needs a {dimension} unit ({', '.join(allowed)})")
    if suffix not in UNITS:
        raise UnitError(f"unknown unit {suffix!r} in {text!r}")
    if UNITS[suffix][0] != dimension:
        raise UnitError(f"expected a {dimension} ({', '.join(allowed)}), got {suffix!r}")
    return Quantity(value, suffix)


def parse_count(text: str) -> int:
    if not _COUNT.match(text):
        raise UnitError(f"expected a plain nonnegative integer, got {text!r}", code="E100")
    return int(text)


def parse_plain(text: str) -> float:
    value, suffix = split_number(text)
    if suffix:
        raise UnitError(f"{text!r} is dimensionless and takes no unit")
    return value
