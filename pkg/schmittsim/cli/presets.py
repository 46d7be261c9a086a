"""Named configurations and the figure reproductions built on them.

Each repro returns the plot-ready table, the metrics object and whether every
acceptance check passed.
"""
import logging
import math
from dataclasses import dataclass
from typing import Any, Callable

from ..analysis.hysteresis import dc_hysteresis, sweep_curve
from ..analysis.montecarlo import METRICS, monte_carlo, propagation_std
from ..analysis.step import measure_overshoot, measure_rise_time, step_response
from ..analysis.tunability import Knob, tunability_sweep
from ..core.params import Calibration, SchmittParams
from ..graph.blocks import SchmittBlockParams
from ..logic.gates import GateKind
from ..logic.harness import check_truth_table
from ..scenario.serialize import serialize_results

log = logging.getLogger(__name__)

BLOCK_PRESETS: dict[str, Callable[[], SchmittBlockParams]] = {
    "baseline": lambda: SchmittBlockParams(SchmittParams.baseline(), Calibration()),
    "ideal": lambda: SchmittBlockParams(SchmittParams(500.0, 350.0, 200.0), Calibration.ideal()),
}

# gate presets name the calibration mode of the front end
GATE_PRESETS = {"fig5": "calibrated", "baseline": "calibrated", "ideal": "ideal"}

FIGURES = ("fig2a", "fig2b", "fig2c", "fig3a", "fig3b", "fig3c", "fig5")

# Sweep range of the DC figures (pA)
DC_RANGE = (0.0, 500.0)


def block_preset(name: str) -> SchmittBlockParams:
    return BLOCK_PRESETS[name]()


@dataclass
class Repro:
    figure: str
    table: bytes               # CSV
    metrics: dict[str, Any]
    passed: bool


def _within(value: float, lo: float, hi: float) -> bool:
    return value is not None and not math.isnan(value) and lo <= value <= hi


def _csv_rows(header: list[str], rows) -> bytes:
    lines = [",".join(header)]
    lines += [",".join(f"{v:.2f}" if isinstance(v, float) else str(v) for v in row) for row in rows]
    return ("\n".join(lines) + "\n").encode("utf-8")


# -------------------------
# Figures
# -------------------------
def _fig2a(**_) -> Repro:
    block = block_preset("baseline")
    trace = step_response(block)
    overshoot = measure_overshoot(trace)
    rise = measure_rise_time(trace)
    checks = {
        "overshoot_in_5_15pct": _within(overshoot, 0.05, 0.15),
        "rise_time_in_200_400us": _within(rise, 200e-6, 400e-6),
    }
    metrics = {"overshoot": overshoot, "rise_time_us": rise * 1e6, "checks": checks}
    return Repro("fig2a", serialize_results(trace, "csv"), metrics, all(checks.values()))


def _fig2b(**_) -> Repro:
    block = block_preset("baseline")
    m = dc_hysteresis(block, *DC_RANGE, steps=200)
    grid, up, down = sweep_curve(block, *DC_RANGE, steps=200)
    targets = {"i_th_high": 350.0, "i_th_low": 150.0, "hyst_width": 200.0, "high_level": 500.0}
    checks = {f"{k}_within_2pA": m.bistable and abs(getattr(m, k) - v) <= 2.0 for k, v in targets.items()}
    table = _csv_rows(["i_in_pA", "out_up_pA", "out_down_pA"], zip(grid.tolist(), up.tolist(), down.tolist()))
    return Repro("fig2b", table, {**m.as_dict(), "checks": checks}, all(checks.values()))


def _fig2c(seed: int = 0, runs: int = 500, workers: int = 1, **_) -> Repro:
    dist = monte_carlo(block_preset("baseline"), sigma=10.0, runs=runs, seed=seed, workers=workers)
    oracle = propagation_std(dist.sigma)
    checks = {"retention_is_1": dist.retention == 1.0}
    for name in METRICS:
        std = dist.std(name)
        checks[f"{name}_std_in_5_25pA"] = _within(std, 5.0, 25.0)
        checks[f"{name}_std_within_20pct_of_oracle"] = _within(std, 0.8 * oracle[name], 1.2 * oracle[name])
    metrics = {**dist.summary(), "retention": dist.retention, "oracle_std_pA": oracle, "checks": checks}
    return Repro("fig2c", serialize_results(dist, "csv"), metrics, all(checks.values()))


# knob -> (expected relative error at the top of the sweep, tolerance)
_TUNE_TARGETS = {Knob.GAIN: (0.028, 0.003), Knob.THRESH: (0.045, 0.003), Knob.WIDTH: (0.0525, 0.004)}


def _fig3(knob: Knob, figure: str) -> Repro:
    report = tunability_sweep(knob)
    target, tol = _TUNE_TARGETS[knob]
    top = report.set_points[-1]
    checks = {
        "rel_error_at_top": abs(report.rel_error_at_top - target) <= tol,
        "slope_within_0.005": abs(report.slope - 1.0) <= 0.005,
    }
    metrics = {**report.as_dict(), f"rel_error_at_{top:g}pA": report.rel_error_at_top, "checks": checks}
    return Repro(figure, serialize_results(report, "csv"), metrics, all(checks.values()))


def _fig5(**_) -> Repro:
    rows, checks = [], {}
    for mode in ("ideal", "calibrated"):
        for kind in GateKind:
            _, truth = check_truth_table(kind, mode=mode)
            for r in truth:
                label = f"{mode}_{kind.value}_{r.inputs[0].value}{r.inputs[1].value}"
                checks[label] = r.ok
                rows.append([mode, kind.value, r.inputs[0].value, r.inputs[1].value, r.expected,
                             "" if r.decoded is None else r.decoded, int(r.held)])
    passed = sum(checks.values())
    table = _csv_rows(["mode", "gate", "a", "b", "expected", "decoded", "held"], rows)
    metrics = {"passed": passed, "total": len(checks), "checks": checks}
    return Repro("fig5", table, metrics, passed == len(checks))


REPROS: dict[str, Callable[..., Repro]] = {
    "fig2a": _fig2a,
    "fig2b": _fig2b,
    "fig2c": _fig2c,
    "fig3a": lambda **_: _fig3(Knob.GAIN, "fig3a"),
    "fig3b": lambda **_: _fig3(Knob.THRESH, "fig3b"),
    "fig3c": lambda **_: _fig3(Knob.WIDTH, "fig3c"),
    "fig5": _fig5,
}


def repro(figure: str, **kwargs) -> Repro:
    result = REPROS[figure](**kwargs)
    failed = [k for k, ok in result.metrics.get("checks", {}).items() if not ok]
    if failed:
        log.error("%s: %d check(s) failed: %s", figure, len(failed), ", ".join(failed))
    else:
        log.info("%s: all checks passed", figure)
    result.metrics = {"figure": figure, "passed_all": result.passed, **result.metrics}
    return result
