import csv
import io
import json
import math
import os
import tempfile
from pathlib import Path
from typing import Any, Literal

from ..analysis.hysteresis import HysteresisMetrics
from ..analysis.montecarlo import METRICS, MismatchDistribution
from ..analysis.tunability import LinearityReport
from ..graph.transient import Trace
from ..logic.harness import GateRun

Format = Literal["csv", "json"]

CURRENT_FMT = "{:.2f}"   # 0.01 pA
TIME_FMT = "{:.9f}"      # 1 ns


def _cell(x) -> str:
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    if isinstance(x, bool):
        return "1" if x else "0"
    if isinstance(x, float):
        return CURRENT_FMT.format(x)
    return str(x)


def _csv(header: list[str], rows) -> bytes:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow(row)
    return buf.getvalue().encode("utf-8")


def _json_safe(obj: Any) -> Any:
    if isinstance(obj, float):
        return None if not math.isfinite(obj) else obj
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    return obj


def to_dict(obj: Any) -> dict:
    if isinstance(obj, HysteresisMetrics):
        return obj.as_dict()
    if isinstance(obj, LinearityReport):
        return obj.as_dict()
    if isinstance(obj, MismatchDistribution):
        return obj.summary()
    if isinstance(obj, GateRun):
        return {
            "kind": obj.kind.value if obj.kind else None,
            "samples": [
                {
                    "event_time_s": s.event_time,
                    "settle_time_s": s.settle_time,
                    "value": s.value,
                    "current_pA": round(s.current, 2),
                    "held": s.held,
                }
                for s in obj.samples
            ],
        }
    if isinstance(obj, Trace):
        return {"time_s": [float(t) for t in obj.times],
                **{p: [round(float(v), 2) for v in y] for p, y in obj.probes.items()}}
    if isinstance(obj, dict):
        return obj
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def serialize_results(obj: Any, fmt: Format = "json") -> bytes:
    """CSV (plot-ready table) or JSON (metrics object, keys in a fixed order)."""
    if fmt == "json":
        return (json.dumps(_json_safe(to_dict(obj)), indent=2) + "\n").encode("utf-8")
    if fmt != "csv":
        raise ValueError(f"unknown format {fmt!r}")

    if isinstance(obj, Trace):
        probes = list(obj.probes)
        rows = ([TIME_FMT.format(t), *(CURRENT_FMT.format(obj.probes[p][i]) for p in probes)]
                for i, t in enumerate(obj.times))
        return _csv(["time_s", *probes], rows)
    if isinstance(obj, LinearityReport):
        rows = ([_cell(s), _cell(m), _cell(v), _cell(r)]
                for s, m, v, r in zip(obj.set_points, obj.measured, obj.valid, obj.residuals))
        return _csv(["set_pA", "measured_pA", "valid", "residual_pA"], rows)
    if isinstance(obj, MismatchDistribution):
        rows = ([str(i), *(_cell(getattr(r, m)) for m in METRICS), _cell(r.bistable)]
                for i, r in enumerate(obj.runs))
        return _csv(["run", *(f"{m}_pA" for m in METRICS), "bistable"], rows)
    if isinstance(obj, HysteresisMetrics):
        d = obj.as_dict()
        return _csv(list(d), [[_cell(v) for v in d.values()]])
    if isinstance(obj, GateRun):
        rows = ([TIME_FMT.format(s.event_time), TIME_FMT.format(s.settle_time),
                 "" if s.value is None else str(s.value), _cell(s.current), _cell(s.held)]
                for s in obj.samples)
        return _csv(["event_time_s", "settle_time_s", "value", "current_pA", "held"], rows)
    raise TypeError(f"no CSV layout for {type(obj).__name__}")


def write_atomic(path: str | os.PathLike, data: bytes) -> Path:
    """Write ``data`` next to ``path`` and rename it into place."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent)
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(data)
            f.flush()
            os.fsync(f.fileno())
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except FileNotFoundError:
            pass
        raise
    return path
