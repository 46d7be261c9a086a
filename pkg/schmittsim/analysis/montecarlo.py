"""Monte Carlo mismatch of bias currents and leakage offsets.

Every run perturbs the three bias currents and the three calibration offsets
with independent N(0, sigma²) draws. All draws are made up front from one
seeded generator, so results do not depend on the worker count.
"""
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
import psutil

from ..core.params import Calibration, DynamicsConfig, SchmittParams
from ..errors import ConfigurationError, DomainError
from ..graph.blocks import SchmittBlockParams
from ..graph.dc import Model
from .hysteresis import HysteresisMetrics, dc_hysteresis

log = logging.getLogger(__name__)

METRICS = ("i_th_high", "i_th_low", "hyst_width", "high_level")

# Default standard deviation of every perturbation (pA)
DEFAULT_SIGMA = 10.0

MAX_RUNS = 100_000


@dataclass(frozen=True)
class MismatchDistribution:
    runs: tuple[HysteresisMetrics, ...]
    sigma: float
    seed: int

    @property
    def retained(self) -> tuple[HysteresisMetrics, ...]:
        return tuple(r for r in self.runs if r.bistable)

    @property
    def retention(self) -> float:
        return len(self.retained) / len(self.runs) if self.runs else 0.0

    def column(self, metric: str) -> np.ndarray:
        return np.asarray([getattr(r, metric) for r in self.retained], dtype=float)

    def mean(self, metric: str) -> float:
        col = self.column(metric)
        return float(np.mean(col)) if len(col) else math.nan

    def std(self, metric: str) -> float:
        col = self.column(metric)
        return float(np.std(col, ddof=1)) if len(col) > 1 else math.nan

    def summary(self) -> dict:
        return {
            "runs": len(self.runs),
            "retained": len(self.retained),
            "sigma_pA": self.sigma,
            "seed": self.seed,
            "mean_pA": {m: self.mean(m) for m in METRICS},
            "std_pA": {m: self.std(m) for m in METRICS},
        }


def propagation_std(sigma: float) -> dict[str, float]:
    """First-order spread of each metric for independent N(0, sigma²) mismatch.

    Threshold and gain each see one bias and one offset, the lower threshold
    sees four terms.
    """
    return {
        "i_th_high": math.sqrt(2) * sigma,
        "i_th_low": 2.0 * sigma,
        "hyst_width": math.sqrt(2) * sigma,
        "high_level": math.sqrt(2) * sigma,
    }


def default_workers() -> int:
    return psutil.cpu_count(logical=False) or 1


def _one_run(task) -> HysteresisMetrics:
    params, cal, dyn, hi, steps, model = task
    try:
        block = SchmittBlockParams(SchmittParams(*params), Calibration(*cal), dyn)
    except ConfigurationError:
        return HysteresisMetrics.unset()
    return dc_hysteresis(block, 0.0, hi, steps, model=model)


def monte_carlo(base: SchmittBlockParams | None = None, sigma: float = DEFAULT_SIGMA, runs: int = 500,
                seed: int = 0, workers: int = 1, steps: int = 100, model: Model = "ideal",
                hi: float | None = None) -> MismatchDistribution:
    """Perturb ``base`` ``runs`` times and extract DC hysteresis from each.

    ``workers`` > 1 spreads the runs over a process pool; 0 sizes the pool by
    the physical core count.
    """
    if runs < 1:
        raise DomainError(f"runs must be at least 1, got {runs}")
    if runs > MAX_RUNS:
        raise DomainError(f"runs must be at most {MAX_RUNS}, got {runs}")
    if sigma < 0 or not math.isfinite(sigma):
        raise DomainError(f"sigma must be finite and nonnegative, got {sigma}")
    base = base or SchmittBlockParams(SchmittParams.baseline())
    dyn: DynamicsConfig = base.dyn

    rng = np.random.default_rng(seed)
    draws = rng.normal(0.0, sigma, size=(runs, 6)) if sigma > 0 else np.zeros((runs, 6))

    p, c = base.params, base.cal
    nominal = np.array([p.i_gain, p.i_thresh, p.i_width, c.gain_offset, c.thresh_offset, c.width_offset])
    perturbed = nominal + draws

    if hi is None:
        hi = base.op.i_th_high + 8.0 * sigma + 50.0

    tasks = [(tuple(row[:3]), tuple(row[3:]), dyn, hi, steps, model) for row in perturbed]

    if workers == 0:
        workers = default_workers()
    if workers > 1 and runs > 1:
        log.info("monte carlo: %d runs on %d workers", runs, workers)
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_one_run, tasks, chunksize=max(1, runs // (4 * workers))))
    else:
        results = [_one_run(t) for t in tasks]

    dist = MismatchDistribution(tuple(results), float(sigma), int(seed))
    log.info("monte carlo: %d/%d runs bistable", len(dist.retained), runs)
    return dist
