"""Command-line driver: every pipeline stage standalone, plus compare/sweep/suite runs."""

from __future__ import annotations

import argparse
import json
import logging
import math
from pathlib import Path
import sys
from typing import Any, Callable

from .circuit import parse_ir, serialize
from .config import ConfigValidationError, RunConfig, Settings, build_run_config
from .contracts import StageFailure, parse_schedule_json, run_stage
from .experiments import (
    SWEEP_P_VALUES,
    emit_report,
    filter_entries,
    generate_circuit,
    load_suite,
    report_csv,
    run_compare,
    run_suite,
    sweep_p_success,
)
from .formatter import format_rows, render_snapshot
from .isa import parse_isa
from .layout import build_layout, default_mapping, parse_grid, parse_mapping
from .runtime import results_csv, run_trials, summarize
from .scheduler import Schedule, schedule as build_schedule, validate_schedule
from .synthesis import synthesize
from .transpiler import spc_cost, transpile


logger = logging.getLogger(__name__)

CONFIG_DESTS = (
    "d",
    "m",
    "p_success",
    "distill_patches",
    "rho",
    "length_stddev",
    "length_rounding",
    "seed",
    "trials",
    "layout",
    "data_grid",
    "mapping",
    "benchmark",
    "width",
    "height",
    "layers",
    "steps",
    "J",
    "g",
    "t",
    "hold_distill",
    "workers",
    "out",
)


def _params_parser() -> argparse.ArgumentParser:
    """Flags shared by every subcommand; unset flags fall through to config/env/defaults."""
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument("--config", type=Path, help="Flat `key = value` config file.")
    parent.add_argument("--verbose", action="store_true", help="Debug logging.")
    parent.add_argument("--out", default=None, help="Output path (stdout when omitted).")

    code = parent.add_argument_group("code and distillation")
    code.add_argument("--d", type=int, default=None, help="Code distance (odd, >= 3).")
    code.add_argument("--m", type=int, default=None, help="Cycles per distillation round.")
    code.add_argument("--p-success", dest="p_success", type=float, default=None)
    code.add_argument("--D", dest="distill_patches", type=int, default=None, help="Distillation patches per pi/8.")
    code.add_argument(
        "--hold-distill",
        dest="hold_distill",
        action="store_const",
        const=True,
        default=None,
        help="Reserve every distill patch for the whole pi/8 instruction.",
    )

    synth = parent.add_argument_group("synthesis")
    synth.add_argument("--rho", type=float, default=None, help="Synthesis precision.")
    synth.add_argument("--length-stddev", dest="length_stddev", type=float, default=None)
    synth.add_argument("--length-rounding", dest="length_rounding", choices=["round", "floor"], default=None)

    runs = parent.add_argument_group("runs")
    runs.add_argument("--seed", type=int, default=None)
    runs.add_argument("--trials", type=int, default=None)
    runs.add_argument("--workers", type=int, default=None, help="Worker processes for trials.")

    placement = parent.add_argument_group("layout")
    placement.add_argument("--layout", choices=["standard", "sparse"], default=None)
    placement.add_argument("--data-grid", dest="data_grid", default=None, help="Logical data grid AxB.")
    placement.add_argument("--mapping", default=None, help="Mapping file of `<qubit> <row> <col>` lines.")

    bench = parent.add_argument_group("benchmark")
    bench.add_argument("--benchmark", choices=["rcs", "ising"], default=None)
    bench.add_argument("--width", type=int, default=None)
    bench.add_argument("--height", type=int, default=None)
    bench.add_argument("--layers", type=int, default=None, help="RCS layers.")
    bench.add_argument("--steps", type=int, default=None, help="Ising Trotter steps.")
    bench.add_argument("--J", dest="J", type=float, default=None)
    bench.add_argument("--g", dest="g", type=float, default=None)
    bench.add_argument("--t", dest="t", type=float, default=None)
    return parent


def build_parser() -> argparse.ArgumentParser:
    """Build parser."""
    parser = argparse.ArgumentParser(
        prog="lapbc-sim",
        description="Compile Clifford+T programs to SPC and LAPBC, schedule LAPBC on patch layouts, and compare cycle counts.",
    )
    commands = parser.add_subparsers(dest="command", required=True)
    parent = _params_parser()

    commands.add_parser("gen-rcs", parents=[parent], help="Random circuit sampling benchmark as IR text.")
    commands.add_parser("gen-ising", parents=[parent], help="Trotterized 2D Ising benchmark as IR text.")

    synth = commands.add_parser("synth", parents=[parent], help="Replace rz gates with synthesized placeholders.")
    synth.add_argument("input", help="IR file, or - for stdin.")

    trans = commands.add_parser("transpile", parents=[parent], help="IR to SPC or LAPBC instructions.")
    trans.add_argument("input", help="IR file (rz-free), or - for stdin.")
    trans.add_argument("--flavor", choices=["spc", "lapbc"], default="lapbc")

    sched = commands.add_parser("schedule", parents=[parent], help="Schedule a LAPBC program; writes schedule JSON.")
    sched.add_argument("input", help="LAPBC instruction file, or - for stdin.")
    sched.add_argument("--csv", type=Path, default=None, help="Also write per-patch timelines as CSV.")
    sched.add_argument("--snapshot", type=int, default=None, help="Print the patch grid at this cycle.")

    sim = commands.add_parser("simulate", parents=[parent], help="Run trials of a schedule JSON; writes per-trial CSV.")
    sim.add_argument("input", help="Schedule JSON file, or - for stdin.")

    commands.add_parser("compare", parents=[parent], help="One SPC vs LAPBC comparison row.")

    sweep = commands.add_parser("sweep", parents=[parent], help="Comparison rows over p_success values.")
    sweep.add_argument(
        "--p-values",
        default=",".join(str(p) for p in SWEEP_P_VALUES),
        help="Comma-separated p_success values.",
    )

    suite = commands.add_parser("suite", parents=[parent], help="Run the benchmark suite into a run directory.")
    suite.add_argument("--benchmarks", type=Path, default=Path("eval/benchmarks.yaml"))
    suite.add_argument("--ids", default="", help="Comma-separated entry ids to run.")
    suite.add_argument("--limit", type=int, default=None)
    suite.add_argument("--run-label", default=None)
    suite.add_argument("--output-root", type=Path, default=None)
    return parser


def configure_logging(verbose: bool) -> None:
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )


def _read_input(source: str) -> str:
    if source == "-":
        return sys.stdin.read()
    path = Path(source)
    if not path.exists():
        raise FileNotFoundError(f"Input file not found: {path}")
    return path.read_text(encoding="utf-8")


def _emit(text: str, out: str | None) -> None:
    if not text.endswith("\n"):
        text += "\n"
    if out:
        path = Path(out)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _fit_grid(qubit_count: int) -> tuple[int, int]:
    """Near-square grid holding qubit_count data qubits."""
    count = max(qubit_count, 1)
    a = math.isqrt(count)
    if a * a < count:
        a += 1
    return math.ceil(count / a), a


def _cmd_generate(args: argparse.Namespace, config: RunConfig) -> None:
    circuit = run_stage("generate", generate_circuit, config)
    _emit(serialize(circuit), config.out)


def _cmd_synth(args: argparse.Namespace, config: RunConfig) -> None:
    circuit = run_stage("parse", parse_ir, run_stage("input", _read_input, args.input))
    synthesized = run_stage("synthesize", synthesize, circuit, config.synthesis_params())
    _emit(serialize(synthesized), config.out)


def _cmd_transpile(args: argparse.Namespace, config: RunConfig) -> None:
    circuit = run_stage("parse", parse_ir, run_stage("input", _read_input, args.input))
    program = run_stage(f"transpile-{args.flavor}", transpile, circuit, args.flavor)
    if args.flavor == "spc":
        cost = run_stage("transpile-spc", spc_cost, program, config.d)
        logger.info("SPC cost at d=%d: %d cycles.", config.d, cost)
    _emit(program.to_text(), config.out)


def _cmd_schedule(args: argparse.Namespace, config: RunConfig) -> None:
    program = run_stage("parse", parse_isa, run_stage("input", _read_input, args.input))
    grid = run_stage(
        "layout",
        lambda: parse_grid(config.data_grid) if config.data_grid else _fit_grid(program.qubit_count),
    )
    layout = run_stage("layout", build_layout, config.layout, *grid)
    if config.mapping:
        mapping_text = run_stage("mapping", _read_input, config.mapping)
        mapping = run_stage("mapping", parse_mapping, mapping_text, layout)
    else:
        mapping = run_stage("mapping", default_mapping, layout, program.qubit_count)
    result = run_stage("schedule", build_schedule, program, layout, mapping, config.schedule_params())
    run_stage("validate", validate_schedule, result)
    logger.info("Scheduled %d instructions, makespan %d.", len(result.records), result.makespan)

    if args.csv:
        args.csv.parent.mkdir(parents=True, exist_ok=True)
        args.csv.write_text(result.to_csv(), encoding="utf-8")
    if args.snapshot is not None:
        print(run_stage("snapshot", render_snapshot, result, args.snapshot))
    if config.out or args.snapshot is None:
        _emit(json.dumps(result.to_dict(), indent=2, ensure_ascii=True), config.out)


def _cmd_simulate(args: argparse.Namespace, config: RunConfig) -> None:
    payload = run_stage("parse", parse_schedule_json, run_stage("input", _read_input, args.input))
    loaded = run_stage("parse", Schedule.from_dict, payload)
    results = run_stage(
        "simulate", run_trials, loaded, loaded.params, config.runtime_params(), workers=config.workers
    )
    stats = summarize(results)
    print(
        f"trials={stats.count} mean={stats.mean:.3f} stddev={stats.stddev:.3f} "
        f"min={stats.minimum} max={stats.maximum} makespan={loaded.makespan}",
        file=sys.stderr if not config.out else sys.stdout,
    )
    _emit(results_csv(results), config.out)


def _cmd_compare(args: argparse.Namespace, config: RunConfig) -> None:
    row = run_compare(config)
    _report([row], config.out)


def _cmd_sweep(args: argparse.Namespace, config: RunConfig) -> None:
    try:
        p_values = [float(item) for item in args.p_values.split(",") if item.strip()]
    except ValueError as exc:
        raise StageFailure("config", f"--p-values must be comma-separated numbers: {exc}", "ValueError") from exc
    _report(sweep_p_success(config, p_values), config.out)


def _report(rows: list, out: str | None) -> None:
    if out:
        run_stage("report", emit_report, rows, Path(out))
        print(format_rows(rows))
    else:
        sys.stdout.write(report_csv(rows))


def _cmd_suite(args: argparse.Namespace, config: RunConfig, settings: Settings) -> None:
    entries = run_stage("suite", load_suite, args.benchmarks)
    ids = [item for item in args.ids.split(",") if item.strip()]
    selected = run_stage("suite", filter_entries, entries, ids, args.limit)
    run_dir, summary = run_stage(
        "suite",
        run_suite,
        selected,
        config,
        args.output_root or settings.output_root,
        args.run_label,
        args.benchmarks,
    )
    print(f"Run directory: {run_dir}")
    print(f"Succeeded: {summary['succeeded']}/{summary['total']}")
    print(f"Trend verdict: {summary['trends']['verdict']}")
    if summary["failed"]:
        raise SystemExit(1)


COMMANDS: dict[str, Callable[[argparse.Namespace, RunConfig], None]] = {
    "gen-rcs": _cmd_generate,
    "gen-ising": _cmd_generate,
    "synth": _cmd_synth,
    "transpile": _cmd_transpile,
    "schedule": _cmd_schedule,
    "simulate": _cmd_simulate,
    "compare": _cmd_compare,
    "sweep": _cmd_sweep,
}


def _cli_values(args: argparse.Namespace) -> dict[str, Any]:
    values = {dest: getattr(args, dest, None) for dest in CONFIG_DESTS}
    if args.command == "gen-rcs":
        values["benchmark"] = "rcs"
    elif args.command == "gen-ising":
        values["benchmark"] = "ising"
    return {key: value for key, value in values.items() if value is not None}


def main(argv: list[str] | None = None) -> None:
    """Run the main entrypoint for this module."""
    parser = build_parser()
    args = parser.parse_args(argv)
    settings = Settings.from_env()
    configure_logging(args.verbose or settings.verbose)

    try:
        values = _cli_values(args)
        if args.command == "schedule" and "data_grid" in values:
            # Standalone programs size the data grid, not the benchmark flags.
            values["height"], values["width"] = parse_grid(values["data_grid"])
        config = build_run_config(settings=settings, config_path=args.config, cli_values=values)
    except (ConfigValidationError, ValueError, FileNotFoundError, RuntimeError) as exc:
        print(f"Error [config]: {exc}", file=sys.stderr)
        raise SystemExit(1) from exc

    try:
        if args.command == "suite":
            _cmd_suite(args, config, settings)
        else:
            COMMANDS[args.command](args, config)
    except StageFailure as exc:
        print(f"Error [{exc.stage}]: {exc.message}", file=sys.stderr)
        raise SystemExit(1) from exc


if __name__ == "__main__":
    main()
