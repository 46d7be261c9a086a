import math
from dataclasses import dataclass
from typing import NamedTuple

from ..errors import ConfigurationError

# Reference temperature for the threshold drift knob (°C)
T_REF = 27.0

# Paper baseline bias currents (pA)
BASELINE_GAIN = 486.0
BASELINE_THRESH = 368.0
BASELINE_WIDTH = 216.0


def _finite(name: str, value: float):
    if not math.isfinite(value):
        raise ConfigurationError(f"{name} must be finite, got {value}")


# -------------------------
# Bias currents
# -------------------------
@dataclass(frozen=True)
class SchmittParams:
    """The three programmable bias currents, in pA."""
    i_gain: float
    i_thresh: float
    i_width: float

    def __post_init__(self):
        for name in ("i_gain", "i_thresh", "i_width"):
            value = getattr(self, name)
            _finite(name, value)
            if value <= 0:
                raise ConfigurationError(f"{name} must be strictly positive, got {value} pA")
        if self.i_width >= self.i_thresh:
            raise ConfigurationError(
                f"bistability requires i_width < i_thresh "
                f"(i_width={self.i_width} pA, i_thresh={self.i_thresh} pA)"
            )

    @classmethod
    def baseline(cls) -> "SchmittParams":
        return cls(BASELINE_GAIN, BASELINE_THRESH, BASELINE_WIDTH)


# -------------------------
# Leakage calibration
# -------------------------
@dataclass(frozen=True)
class Calibration:
    """Affine subthreshold-leakage offsets (pA) added to each bias current."""
    gain_offset: float = 14.0
    thresh_offset: float = -18.0
    width_offset: float = -16.0

    def __post_init__(self):
        for name in ("gain_offset", "thresh_offset", "width_offset"):
            _finite(name, getattr(self, name))

    @classmethod
    def ideal(cls) -> "Calibration":
        return cls(0.0, 0.0, 0.0)

    @property
    def is_ideal(self) -> bool:
        return self.gain_offset == 0.0 and self.thresh_offset == 0.0 and self.width_offset == 0.0


# -------------------------
# Dynamics
# -------------------------
@dataclass(frozen=True)
class DynamicsConfig:
    tau_fb: float = 159e-6           # s
    tau_out: float = 159e-6          # s
    steepness_k: float = 1.0         # 1/pA
    overshoot_coupling: float = 0.5
    temp_thresh_drift: float = 0.0   # pA/°C
    temperature: float = T_REF       # °C

    def __post_init__(self):
        for name in ("tau_fb", "tau_out", "steepness_k", "overshoot_coupling",
                     "temp_thresh_drift", "temperature"):
            _finite(name, getattr(self, name))
        if self.tau_fb <= 0 or self.tau_out <= 0:
            raise ConfigurationError("time constants must be strictly positive")
        if self.steepness_k <= 0:
            raise ConfigurationError("steepness_k must be strictly positive")
        if self.overshoot_coupling < 0:
            raise ConfigurationError("overshoot_coupling must be nonnegative")
        # damping of the output/feedback pair goes negative past this point
        limit = 1.0 + self.tau_out / self.tau_fb
        if self.overshoot_coupling >= limit:
            raise ConfigurationError(
                f"overshoot_coupling must stay below {limit:.3f} for these time constants"
            )

    @property
    def tau_max(self) -> float:
        return max(self.tau_fb, self.tau_out)

    @property
    def tau_min(self) -> float:
        return min(self.tau_fb, self.tau_out)


# -------------------------
# Effective operating point
# -------------------------
class Operating(NamedTuple):
    """Characteristics realised by a trigger after calibration and drift (pA)."""
    i_th_high: float
    i_th_low: float
    hyst_width: float
    high_level: float


def operating_point(params: SchmittParams, cal: Calibration, dyn: DynamicsConfig | None = None) -> Operating:
    drift = 0.0
    if dyn is not None:
        drift = dyn.temp_thresh_drift * (dyn.temperature - T_REF)

    # drift moves the upper switching point only
    i_th_high = params.i_thresh + cal.thresh_offset + drift
    i_th_low = params.i_thresh + cal.thresh_offset - (params.i_width + cal.width_offset)
    width = i_th_high - i_th_low
    high = params.i_gain + cal.gain_offset

    if high <= 0:
        raise ConfigurationError(f"effective gain {high:.3f} pA is not positive")
    if width <= 0:
        raise ConfigurationError(f"effective hysteresis width {width:.3f} pA is not positive")
    if i_th_high <= 0:
        raise ConfigurationError(f"effective upper threshold {i_th_high:.3f} pA is not positive")
    if i_th_low <= 0:
        raise ConfigurationError(
            f"effective lower threshold {i_th_low:.3f} pA is not positive "
            f"(bistability requires i_width < i_thresh)"
        )
    return Operating(i_th_high, i_th_low, width, high)


def compensate(i_th_high: float, hyst_width: float, high_level: float,
               cal: Calibration, dyn: DynamicsConfig | None = None) -> SchmittParams:
    """Bias currents that realise the requested characteristics under ``cal``
    (linear leakage correction)."""
    drift = 0.0
    if dyn is not None:
        drift = dyn.temp_thresh_drift * (dyn.temperature - T_REF)
    params = SchmittParams(
        i_gain=high_level - cal.gain_offset,
        i_thresh=i_th_high - cal.thresh_offset - drift,
        i_width=hyst_width - cal.width_offset - drift,
    )
    operating_point(params, cal, dyn)
    return params
