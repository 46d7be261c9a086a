import logging
import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Mapping

import numpy as np

from ..core.params import Calibration, DynamicsConfig, SchmittParams
from ..errors import ConfigurationError, DomainError
from ..graph.dc import Model
from .hysteresis import HysteresisMetrics, hysteresis_of

log = logging.getLogger(__name__)


class Knob(Enum):
    GAIN = "gain"
    THRESH = "thresh"
    WIDTH = "width"


# Swept field, measured metric and default range (pA) per knob
KNOB_FIELD = {Knob.GAIN: "i_gain", Knob.THRESH: "i_thresh", Knob.WIDTH: "i_width"}
KNOB_METRIC = {Knob.GAIN: "high_level", Knob.THRESH: "i_th_high", Knob.WIDTH: "hyst_width"}
KNOB_RANGE = {Knob.GAIN: (50.0, 500.0), Knob.THRESH: (100.0, 400.0), Knob.WIDTH: (20.0, 300.0)}

# Each set point runs a full DC sweep
MAX_SET_POINTS = 1000

# Held bias currents while another knob is swept (pA)
SWEEP_BASE = {
    Knob.GAIN: SchmittParams.baseline(),
    Knob.THRESH: SchmittParams(486.0, 368.0, 50.0),
    Knob.WIDTH: SchmittParams(486.0, 368.0, 216.0),
}


@dataclass(frozen=True)
class LinearityReport:
    which: Knob
    set_points: tuple[float, ...]
    measured: tuple[float, ...]       # NaN where invalid
    valid: tuple[bool, ...]
    slope: float
    intercept: float
    residuals: tuple[float, ...]      # NaN where invalid
    max_rel_error: float
    rel_error_at_top: float

    def rel_errors(self) -> np.ndarray:
        s = np.asarray(self.set_points)
        m = np.asarray(self.measured)
        err = np.full(len(s), np.nan)
        ok = np.asarray(self.valid)
        err[ok] = np.abs(m[ok] - s[ok]) / s[ok]
        return err

    def as_dict(self) -> dict:
        def clean(values):
            return [None if math.isnan(v) else v for v in values]
        return {
            "knob": self.which.value,
            "set_points_pA": list(self.set_points),
            "measured_pA": clean(self.measured),
            "valid": list(self.valid),
            "slope": self.slope,
            "intercept_pA": self.intercept,
            "residuals_pA": clean(self.residuals),
            "max_rel_error": self.max_rel_error,
            "rel_error_at_top": self.rel_error_at_top,
        }


def _metric(metrics: HysteresisMetrics, which: Knob) -> float | None:
    if not metrics.bistable:
        return None
    return getattr(metrics, KNOB_METRIC[which])


def tunability_sweep(which: Knob | str, lo: float | None = None, hi: float | None = None, steps: int = 10,
                     cal: Calibration | None = None, dyn: DynamicsConfig | None = None,
                     base: SchmittParams | None = None, model: Model = "ideal",
                     sweep_steps: int = 200) -> LinearityReport:
    """Sweep one bias current over ``steps + 1`` set points and fit measured
    against set value.

    Set points that give an invalid configuration are kept and flagged.
    """
    which = Knob(which)
    cal = cal or Calibration()
    dyn = dyn or DynamicsConfig()
    base = base or SWEEP_BASE[which]
    d_lo, d_hi = KNOB_RANGE[which]
    lo = d_lo if lo is None else lo
    hi = d_hi if hi is None else hi
    if not lo < hi:
        raise DomainError(f"tunability range needs lo < hi, got {lo}..{hi}")
    if steps < 1:
        raise DomainError("tunability sweep needs at least one step")
    if steps > MAX_SET_POINTS:
        raise DomainError(f"tunability sweep allows at most {MAX_SET_POINTS} steps, got {steps}")

    set_points = np.linspace(lo, hi, steps + 1)
    measured = np.full(len(set_points), np.nan)

    for i, value in enumerate(set_points):
        try:
            params = replace(base, **{KNOB_FIELD[which]: float(value)})
            metrics = hysteresis_of(params, cal, dyn, steps=sweep_steps, model=model)
        except ConfigurationError as e:
            log.warning("%s=%.1f pA skipped: %s", KNOB_FIELD[which], value, e)
            continue
        m = _metric(metrics, which)
        if m is None:
            log.warning("%s=%.1f pA: no hysteresis loop", KNOB_FIELD[which], value)
            continue
        measured[i] = m

    valid = ~np.isnan(measured)
    if valid.sum() < 2:
        raise ConfigurationError(f"{which.value} sweep has fewer than two valid set points")

    slope, intercept = np.polyfit(set_points[valid], measured[valid], 1)
    residuals = np.full(len(set_points), np.nan)
    residuals[valid] = measured[valid] - (slope * set_points[valid] + intercept)

    rel = np.abs(measured - set_points) / set_points
    report = LinearityReport(
        which=which,
        set_points=tuple(float(v) for v in set_points),
        measured=tuple(float(v) for v in measured),
        valid=tuple(bool(v) for v in valid),
        slope=float(slope),
        intercept=float(intercept),
        residuals=tuple(float(v) for v in residuals),
        max_rel_error=float(np.max(rel[valid])),
        # NaN when the top set point itself is invalid
        rel_error_at_top=float(rel[-1]),
    )
    log.info("%s sweep: slope %.4f, intercept %.2f pA, error at top %.2f%%",
             which.value, report.slope, report.intercept, 100 * report.rel_error_at_top)
    return report


def fit_calibration(reports: Mapping[Knob, LinearityReport]) -> Calibration:
    """Leakage offsets as the mean measured-minus-set difference per knob."""
    offsets = {}
    for knob, field_name in ((Knob.GAIN, "gain_offset"), (Knob.THRESH, "thresh_offset"),
                             (Knob.WIDTH, "width_offset")):
        report = reports.get(knob)
        if report is None:
            offsets[field_name] = 0.0
            continue
        s = np.asarray(report.set_points)[np.asarray(report.valid)]
        m = np.asarray(report.measured)[np.asarray(report.valid)]
        offsets[field_name] = float(np.mean(m - s))
    return Calibration(**offsets)
