import argparse
import logging
import os
import sys
from pathlib import Path

from ..analysis.hysteresis import dc_hysteresis
from ..analysis.montecarlo import DEFAULT_SIGMA, monte_carlo
from ..analysis.step import measure_overshoot, measure_rise_time, step_response
from ..analysis.tunability import Knob, tunability_sweep
from ..errors import NotApplicable, ScenarioError, SchmittSimError
from ..graph.transient import Trace
from ..log import setup_logging, success
from ..logic.gates import GateKind
from ..logic.harness import check_truth_table
from ..scenario.build import run_scenario
from ..scenario.diagnostics import Diagnostic
from ..scenario.serialize import serialize_results, write_atomic
from ..scenario.validate import load_scenario
from .presets import BLOCK_PRESETS, FIGURES, GATE_PRESETS, block_preset, repro

log = logging.getLogger("schmittsim.cli")

# -------------------------
# EXIT CODES
# -------------------------
EXIT_OK = 0
EXIT_DIAGNOSTICS = 1
EXIT_USAGE = 2

OUT_ENV = "SCHMITTSIM_OUT"
DEFAULT_OUT = "results"

SUBCOMMANDS = ("run", "dc", "tran", "mc", "tune", "gate", "validate", "repro")


def flatten_args(args: dict[str, object]) -> list[str]:
    result: list[str] = []

    for key, value in args.items():
        if value is None:
            continue

        # Boolean flag
        if isinstance(value, bool):
            if value:
                result.append(key)
            continue

        # List → repeat flag
        if isinstance(value, list):
            for item in value:
                result.append(key)
                result.append(str(item))
            continue

        result.append(key)
        result.append(str(value))

    return result


# -------------------------
# PARSER
# -------------------------
def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", type=str, default=None, help="Output directory (overrides $SCHMITTSIM_OUT)")
    common.add_argument("--json-diag", action="store_true", help="Machine-readable diagnostics on stderr")
    common.add_argument("--debug", action="store_true", help="Debug logging")

    parser = argparse.ArgumentParser(prog="schmittsim", description="Behavioral Schmitt-trigger and spike-logic simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", parents=[common], help="Run the analysis of a scenario file")
    p.add_argument("scenario", type=Path)
    p.add_argument("--format", choices=("csv", "json"), default=None)

    p = sub.add_parser("validate", parents=[common], help="Check a scenario file")
    p.add_argument("scenario", type=Path)

    p = sub.add_parser("dc", parents=[common], help="DC hysteresis of a preset trigger")
    p.add_argument("--preset", choices=sorted(BLOCK_PRESETS), default="baseline")
    p.add_argument("--lo", type=float, default=0.0, help="Sweep start (pA)")
    p.add_argument("--hi", type=float, default=500.0, help="Sweep end (pA)")
    p.add_argument("--steps", type=int, default=200)
    p.add_argument("--model", choices=("ideal", "smooth"), default="ideal")

    p = sub.add_parser("tran", parents=[common], help="Step response of a preset trigger")
    p.add_argument("--preset", choices=sorted(BLOCK_PRESETS), default="baseline")
    p.add_argument("--t-stop", type=float, default=5e-3, help="Run length (s)")
    p.add_argument("--dt", type=float, default=None, help="Integration step (s)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")

    p = sub.add_parser("mc", parents=[common], help="Monte Carlo mismatch of a preset trigger")
    p.add_argument("--preset", choices=sorted(BLOCK_PRESETS), default="baseline")
    p.add_argument("--sigma", type=float, default=DEFAULT_SIGMA, help="Perturbation std (pA)")
    p.add_argument("--runs", type=int, default=500)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1, help="Process pool size, 0 = physical cores")

    p = sub.add_parser("tune", parents=[common], help="Tunability sweep of one bias current")
    p.add_argument("--knob", choices=[k.value for k in Knob], required=True)
    p.add_argument("--preset", choices=sorted(BLOCK_PRESETS), default="baseline")
    p.add_argument("--lo", type=float, default=None)
    p.add_argument("--hi", type=float, default=None)
    p.add_argument("--steps", type=int, default=10)

    p = sub.add_parser("gate", parents=[common], help="Truth-table check of a spike gate")
    p.add_argument("--kind", choices=[k.value for k in GateKind], required=True)
    p.add_argument("--preset", choices=sorted(GATE_PRESETS), default="fig5")
    p.add_argument("--rest", type=float, default=0.0, help="Extra rest after the last spike (s)")

    p = sub.add_parser("repro", parents=[common], help="Reproduce a figure and check its numbers")
    p.add_argument("figure", type=str)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--runs", type=int, default=500)
    p.add_argument("--workers", type=int, default=1)

    return parser


def out_dir(args, config: dict) -> Path:
    if args.out:
        return Path(args.out)
    env = os.environ.get(OUT_ENV)
    if env:
        return Path(env)
    return Path(config.get("output_dir", DEFAULT_OUT))


def with_defaults(argv: list[str], config: dict) -> list[str]:
    """Insert the configured flags of the subcommand right after it, so that
    flags given on the command line win."""
    if not argv or argv[0] not in SUBCOMMANDS:
        return argv
    defaults = config.get("args", {}).get(argv[0], {})
    return [argv[0], *flatten_args(defaults), *argv[1:]]


# -------------------------
# OUTPUT
# -------------------------
def report_diagnostics(diags: list[Diagnostic], source: str):
    for d in diags:
        level = logging.ERROR if d.is_error else logging.WARNING
        log.log(level, f"{source}:{d}", extra={"data": {"file": source, **d.as_dict()}})


def emit(data: bytes):
    sys.stdout.write(data.decode("utf-8"))
    sys.stdout.flush()


# -------------------------
# COMMANDS
# -------------------------
def cmd_validate(args, config) -> int:
    text = args.scenario.read_bytes()
    try:
        _, warnings = load_scenario(text)
    except ScenarioError as e:
        report_diagnostics(e.diagnostics, str(args.scenario))
        return EXIT_DIAGNOSTICS
    report_diagnostics(warnings, str(args.scenario))
    success(log, f"{args.scenario}: ok")
    return EXIT_OK


def cmd_run(args, config) -> int:
    text = args.scenario.read_bytes()
    try:
        doc, warnings = load_scenario(text)
    except ScenarioError as e:
        report_diagnostics(e.diagnostics, str(args.scenario))
        return EXIT_DIAGNOSTICS
    report_diagnostics(warnings, str(args.scenario))

    result = run_scenario(doc)
    fmt = args.format or ("csv" if isinstance(result.payload, Trace) else "json")
    path = out_dir(args, config) / f"{args.scenario.stem}.{fmt}"
    write_atomic(path, serialize_results(result.payload, fmt))
    success(log, f"{result.kind}: wrote {path}")
    return EXIT_OK


def cmd_dc(args, config) -> int:
    metrics = dc_hysteresis(block_preset(args.preset), args.lo, args.hi, args.steps, model=args.model)
    emit(serialize_results(metrics, "json"))
    return EXIT_OK


def cmd_tran(args, config) -> int:
    trace = step_response(block_preset(args.preset), t_stop=args.t_stop, dt=args.dt)
    path = out_dir(args, config) / f"tran_{args.preset}.{args.format}"
    write_atomic(path, serialize_results(trace, args.format))
    try:
        log.info(f"overshoot {100 * measure_overshoot(trace):.1f} %, "
                 f"rise time {1e6 * measure_rise_time(trace):.0f} us")
    except NotApplicable as e:
        log.warning(f"step metrics not available: {e}")
    success(log, f"wrote {path}")
    return EXIT_OK


def cmd_mc(args, config) -> int:
    dist = monte_carlo(block_preset(args.preset), args.sigma, args.runs, seed=args.seed, workers=args.workers)
    path = out_dir(args, config) / f"mc_{args.preset}_seed{args.seed}.csv"
    write_atomic(path, serialize_results(dist, "csv"))
    emit(serialize_results(dist, "json"))
    return EXIT_OK


def cmd_tune(args, config) -> int:
    block = block_preset(args.preset)
    report = tunability_sweep(args.knob, args.lo, args.hi, args.steps, cal=block.cal, dyn=block.dyn)
    emit(serialize_results(report, "json"))
    return EXIT_OK


def cmd_gate(args, config) -> int:
    _, rows = check_truth_table(args.kind, mode=GATE_PRESETS[args.preset], rest=args.rest)
    for r in rows:
        a, b = (p.value for p in r.inputs)
        line = f"{args.kind.upper()}({a},{b}) expected {r.expected} decoded {r.decoded} held {r.held}"
        (log.info if r.ok else log.error)(line)
    if all(r.ok for r in rows):
        success(log, f"{args.kind}: {len(rows)}/{len(rows)} pass")
        return EXIT_OK
    log.error(f"{args.kind}: {sum(r.ok for r in rows)}/{len(rows)} pass")
    return EXIT_DIAGNOSTICS


def cmd_repro(args, config, parser) -> int:
    if args.figure not in FIGURES:
        parser.error(f"unknown figure {args.figure!r}, expected one of {', '.join(FIGURES)}")
    if args.seed is not None and args.figure != "fig2c":
        parser.error("--seed is only accepted by repro fig2c")

    kwargs = {}
    if args.figure == "fig2c":
        kwargs = {"seed": args.seed or 0, "runs": args.runs, "workers": args.workers}
    result = repro(args.figure, **kwargs)

    out = out_dir(args, config)
    write_atomic(out / f"{args.figure}.csv", result.table)
    write_atomic(out / f"{args.figure}.json", serialize_results(result.metrics, "json"))
    if result.passed:
        success(log, f"{args.figure}: pass ({out})")
        return EXIT_OK
    log.error(f"{args.figure}: FAIL ({out})")
    return EXIT_DIAGNOSTICS


COMMANDS = {
    "run": cmd_run,
    "validate": cmd_validate,
    "dc": cmd_dc,
    "tran": cmd_tran,
    "mc": cmd_mc,
    "tune": cmd_tune,
    "gate": cmd_gate,
}


def dispatch(argv: list[str] | None = None, config: dict | None = None) -> int:
    """Parse ``argv`` and run one subcommand; returns the exit status."""
    config = config or {}
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()

    try:
        args = parser.parse_args(with_defaults(argv, config))
        debug = args.debug or bool(config.get("log", {}).get("debug", False))
        setup_logging(json_mode=args.json_diag, debug=debug)

        if args.command == "repro":
            return cmd_repro(args, config, parser)
        return COMMANDS[args.command](args, config)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_USAGE
    except ScenarioError as e:
        report_diagnostics(e.diagnostics, "scenario")
        return EXIT_DIAGNOSTICS
    except (SchmittSimError, OSError) as e:
        log.error(f"{type(e).__name__}: {e}")
        return EXIT_DIAGNOSTICS
