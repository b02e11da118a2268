"""Experiment pipeline from benchmark parameters to SPC vs LAPBC comparison rows.

One run walks these stages, each wrapped by `run_stage` so failures carry a label:

    generate -> synthesize -> transpile-spc -> transpile-lapbc -> layout
             -> mapping -> schedule -> validate -> simulate

SPC is costed analytically (sequential, no distillation delay). LAPBC is
scheduled on a patch layout and then executed `trials` times with sampled
distillation retries. The suite runner reads eval/benchmarks.yaml, writes a
timestamped run directory and checks the headline trends of the results.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from datetime import datetime, timezone
import io
import json
import logging
import math
from pathlib import Path
import re
import time
from typing import Any, Callable, Sequence

import numpy as np

from .benchmarks import gen_ising, gen_rcs
from .circuit import Circuit
from .config import RunConfig, validate_run_config
from .contracts import PipelineErrorContract, StageFailure, run_stage
from .isa import IsaProgram
from .layout import (
    Layout,
    LayoutError,
    Mapping,
    build_layout,
    check_connectivity,
    default_mapping,
    parse_mapping,
    spc_patch_count,
)
from .runtime import RuntimeParams, RuntimeResult, run_trials, summarize
from .scheduler import Schedule, schedule as build_schedule, validate_schedule
from .synthesis import synthesize
from .transpiler import lapbc_transpile, spc_cost, spc_transpile


logger = logging.getLogger(__name__)

REPORT_FIELDS = (
    "benchmark_id",
    "layout",
    "n",
    "p_success",
    "spc_cycles",
    "lapbc_mean_cycles",
    "lapbc_stddev",
    "parallelism",
    "reduction_percent",
    "patches_spc",
    "patches_lapbc",
)
SWEEP_P_VALUES = (0.1, 0.25, 0.4, 0.7, 0.9)


@dataclass(frozen=True)
class ComparisonRow:
    benchmark_id: str
    layout: str
    n: int
    p_success: float
    spc_cycles: int
    lapbc_mean_cycles: float
    lapbc_stddev: float
    patches_spc: int
    patches_lapbc: int

    @property
    def parallelism(self) -> float:
        """SPC cycles per LAPBC cycle."""
        return self.spc_cycles / self.lapbc_mean_cycles if self.lapbc_mean_cycles else math.inf

    @property
    def reduction_percent(self) -> float:
        return 100.0 * (1.0 - self.lapbc_mean_cycles / self.spc_cycles) if self.spc_cycles else 0.0

    def to_dict(self) -> dict[str, Any]:
        return {
            "benchmark_id": self.benchmark_id,
            "layout": self.layout,
            "n": self.n,
            "p_success": self.p_success,
            "spc_cycles": self.spc_cycles,
            "lapbc_mean_cycles": self.lapbc_mean_cycles,
            "lapbc_stddev": self.lapbc_stddev,
            "parallelism": self.parallelism,
            "reduction_percent": self.reduction_percent,
            "patches_spc": self.patches_spc,
            "patches_lapbc": self.patches_lapbc,
        }

    def csv_values(self) -> list[str]:
        return [
            self.benchmark_id,
            self.layout,
            str(self.n),
            f"{self.p_success:g}",
            str(self.spc_cycles),
            f"{self.lapbc_mean_cycles:.3f}",
            f"{self.lapbc_stddev:.3f}",
            f"{self.parallelism:.4f}",
            f"{self.reduction_percent:.2f}",
            str(self.patches_spc),
            str(self.patches_lapbc),
        ]


@dataclass
class PipelineArtifacts:
    config: RunConfig
    circuit: Circuit
    synthesized: Circuit
    spc_program: IsaProgram
    spc_cycles: int
    lapbc_program: IsaProgram
    layout: Layout
    mapping: Mapping
    schedule: Schedule
    timings: dict[str, float] = field(default_factory=dict)


def _timed(timings: dict[str, float], stage: str, action: Callable[..., Any], *args: Any, **kwargs: Any) -> Any:
    started = time.perf_counter()
    result = run_stage(stage, action, *args, **kwargs)
    timings[stage] = round(time.perf_counter() - started, 3)
    logger.info("Stage %s finished in %.3fs.", stage, timings[stage])
    return result


def generate_circuit(config: RunConfig) -> Circuit:
    """Benchmark circuit named by the configuration."""
    if config.benchmark == "ising":
        return gen_ising(config.width, config.height, config.steps, config.J, config.g, config.t)
    return gen_rcs(config.width, config.height, config.layers, config.seed)


def resolve_layout(config: RunConfig) -> Layout:
    layout = build_layout(config.layout, *config.grid())
    if not check_connectivity(layout):
        raise LayoutError(f"{config.layout} layout {config.grid()} leaves data patches without routing access.")
    return layout


def resolve_mapping(config: RunConfig, layout: Layout) -> Mapping:
    if config.mapping:
        path = Path(config.mapping)
        if not path.exists():
            raise FileNotFoundError(f"Mapping file not found: {path}")
        mapping = parse_mapping(path.read_text(encoding="utf-8"), layout)
    else:
        mapping = default_mapping(layout, config.qubit_count)
    mapping.require(config.qubit_count)
    return mapping


def prepare(config: RunConfig) -> PipelineArtifacts:
    """Run every deterministic stage up to a validated LAPBC schedule."""
    timings: dict[str, float] = {}
    circuit = _timed(timings, "generate", generate_circuit, config)
    synthesized = _timed(timings, "synthesize", synthesize, circuit, config.synthesis_params())
    spc_program = _timed(timings, "transpile-spc", spc_transpile, synthesized)
    spc_cycles = run_stage("transpile-spc", spc_cost, spc_program, config.d)
    lapbc_program = _timed(timings, "transpile-lapbc", lapbc_transpile, synthesized)
    layout = _timed(timings, "layout", resolve_layout, config)
    mapping = _timed(timings, "mapping", resolve_mapping, config, layout)
    schedule = _timed(
        timings, "schedule", build_schedule, lapbc_program, layout, mapping, config.schedule_params()
    )
    _timed(timings, "validate", validate_schedule, schedule)
    return PipelineArtifacts(
        config=config,
        circuit=circuit,
        synthesized=synthesized,
        spc_program=spc_program,
        spc_cycles=spc_cycles,
        lapbc_program=lapbc_program,
        layout=layout,
        mapping=mapping,
        schedule=schedule,
        timings=timings,
    )


def _row(artifacts: PipelineArtifacts, p_success: float, results: Sequence[RuntimeResult]) -> ComparisonRow:
    config = artifacts.config
    stats = summarize(results)
    return ComparisonRow(
        benchmark_id=config.benchmark_id(),
        layout=config.layout,
        n=config.qubit_count,
        p_success=p_success,
        spc_cycles=artifacts.spc_cycles,
        lapbc_mean_cycles=stats.mean,
        lapbc_stddev=stats.stddev,
        patches_spc=spc_patch_count(config.qubit_count),
        patches_lapbc=artifacts.layout.total_cells,
    )


def simulate_artifacts(artifacts: PipelineArtifacts, p_success: float) -> list[RuntimeResult]:
    config = artifacts.config
    runtime = run_stage("simulate", RuntimeParams, p_success=p_success, seed=config.seed, trials=config.trials)
    return _timed(
        artifacts.timings,
        "simulate",
        run_trials,
        artifacts.schedule,
        config.schedule_params(),
        runtime,
        workers=config.workers,
    )


def run_compare(config: RunConfig, artifacts: PipelineArtifacts | None = None) -> ComparisonRow:
    """One comparison row: analytic SPC cycles vs simulated LAPBC cycles."""
    artifacts = artifacts or prepare(config)
    return _row(artifacts, config.p_success, simulate_artifacts(artifacts, config.p_success))


def sweep_p_success(
    config: RunConfig,
    p_values: Sequence[float] = SWEEP_P_VALUES,
    artifacts: PipelineArtifacts | None = None,
) -> list[ComparisonRow]:
    """Re-simulate one schedule at several distillation success probabilities."""
    if not p_values:
        raise ValueError("Sweep needs at least one p_success value.")
    artifacts = artifacts or prepare(config)
    return [_row(artifacts, p, simulate_artifacts(artifacts, p)) for p in p_values]


def sort_rows(rows: Sequence[ComparisonRow]) -> list[ComparisonRow]:
    return sorted(rows, key=lambda row: (row.n, row.benchmark_id, row.layout, row.p_success))


def report_csv(rows: Sequence[ComparisonRow]) -> str:
    """Comparison rows as CSV, sorted by N."""
    if not rows:
        raise ValueError("Report needs at least one row.")
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(REPORT_FIELDS)
    for row in sort_rows(rows):
        writer.writerow(row.csv_values())
    return buffer.getvalue()


def emit_report(rows: Sequence[ComparisonRow], path: Path) -> Path:
    """Write the comparison CSV."""
    text = report_csv(rows)
    path.parent.mkdir(parents=True, exist_ok=True)
    write_text(path, text)
    return path


@dataclass(frozen=True)
class ParallelismFit:
    slope: float
    intercept: float
    r_squared: float
    ratios: tuple[float, ...]

    def to_dict(self) -> dict[str, Any]:
        return {
            "slope": self.slope,
            "intercept": self.intercept,
            "r_squared": self.r_squared,
            "parallelism_over_sqrt_n": list(self.ratios),
        }


def parallelism_fit(rows: Sequence[ComparisonRow]) -> ParallelismFit:
    """Least-squares parallelism = a·N + b, plus parallelism / sqrt(N) per row (sorted by N)."""
    ordered = sort_rows(rows)
    if len(ordered) < 2:
        raise ValueError("Parallelism fit needs at least two rows.")
    n = np.array([row.n for row in ordered], dtype=float)
    y = np.array([row.parallelism for row in ordered], dtype=float)
    slope, intercept = np.polyfit(n, y, 1)
    residual = float(np.sum((y - (slope * n + intercept)) ** 2))
    total = float(np.sum((y - y.mean()) ** 2))
    r_squared = 1.0 - residual / total if total > 0 else 1.0
    ratios = tuple(float(value) for value in y / np.sqrt(n))
    return ParallelismFit(float(slope), float(intercept), r_squared, ratios)


@dataclass(frozen=True)
class SuiteEntry:
    id: str
    overrides: dict[str, Any]
    sweep: tuple[float, ...] = ()
    group: str | None = None


def load_suite(path: Path) -> list[SuiteEntry]:
    """Load benchmark suite entries from YAML."""
    try:
        import yaml
    except ModuleNotFoundError as exc:
        raise RuntimeError(
            "PyYAML is required. Install dependencies with: pip install -e ."
        ) from exc

    if not path.exists():
        raise FileNotFoundError(f"Benchmark file not found: {path}")

    raw = yaml.safe_load(path.read_text(encoding="utf-8"))
    if not isinstance(raw, list):
        raise ValueError("Benchmark YAML must be a list of benchmark items.")

    entries: list[SuiteEntry] = []
    ids: set[str] = set()
    for idx, item in enumerate(raw, start=1):
        if not isinstance(item, dict):
            raise ValueError(f"Benchmark item #{idx} is not an object.")
        entry_id = read_nonempty_str(item, "id", idx)
        if entry_id in ids:
            raise ValueError(f"Duplicate benchmark id: {entry_id}")
        ids.add(entry_id)

        sweep = item.get("sweep") or []
        if not isinstance(sweep, list) or not all(isinstance(p, (int, float)) for p in sweep):
            raise ValueError(f"Benchmark item #{idx} field 'sweep' must be a list of numbers.")
        group = item.get("group")
        overrides = {
            key: value for key, value in item.items() if key not in ("id", "sweep", "group")
        }
        try:
            validate_run_config(overrides)
        except ValueError as exc:
            raise ValueError(f"Benchmark item #{idx} ({entry_id}): {exc}") from exc
        entries.append(
            SuiteEntry(
                id=entry_id,
                overrides=overrides,
                sweep=tuple(float(p) for p in sweep),
                group=str(group) if group else None,
            )
        )
    return entries


def filter_entries(entries: list[SuiteEntry], ids: list[str], limit: int | None) -> list[SuiteEntry]:
    """Keep the requested ids (all when empty), then the first `limit`."""
    filtered = entries
    if ids:
        wanted = {value.strip() for value in ids if value.strip()}
        filtered = [entry for entry in filtered if entry.id in wanted]
    if limit is not None:
        if limit <= 0:
            raise ValueError("--limit must be greater than zero.")
        filtered = filtered[:limit]
    return filtered


def run_entry(entry: SuiteEntry, base: RunConfig) -> dict[str, Any]:
    """Run one suite entry; failures are captured, not raised."""
    started_at = utc_now()
    t0 = time.perf_counter()
    try:
        config = base.replace(**entry.overrides)
        artifacts = prepare(config)
        if entry.sweep:
            rows = sweep_p_success(config, entry.sweep, artifacts=artifacts)
        else:
            rows = [run_compare(config, artifacts=artifacts)]
        return {
            "status": "ok",
            "id": entry.id,
            "group": entry.group,
            "kind": "sweep" if entry.sweep else "compare",
            "started_at_utc": started_at,
            "duration_seconds": round(time.perf_counter() - t0, 3),
            "makespan": artifacts.schedule.makespan,
            "timings": artifacts.timings,
            "rows": [row.to_dict() for row in rows],
            "_rows": rows,
        }
    except StageFailure as exc:
        error = exc.to_contract()
    except Exception as exc:
        error = PipelineErrorContract(stage="config", message=str(exc), error_type=type(exc).__name__)
    return {
        "status": "error",
        "id": entry.id,
        "group": entry.group,
        "kind": "sweep" if entry.sweep else "compare",
        "started_at_utc": started_at,
        "duration_seconds": round(time.perf_counter() - t0, 3),
        "error": error.to_dict(),
    }


def _band(value: float | None, low: float, high: float) -> bool | None:
    """None when the value is missing, else low <= value <= high."""
    if value is None:
        return None
    return low <= value <= high


def _strictly_increasing(values: Sequence[float]) -> bool:
    return all(a < b for a, b in zip(values, values[1:]))


def _improvement(means: dict[float, float], before: float, after: float) -> float | None:
    """Relative drop in mean cycles going from p=before to p=after."""
    if before not in means or after not in means or not means[before]:
        return None
    return 1.0 - means[after] / means[before]


def evaluate_trends(records: list[dict[str, Any]]) -> dict[str, Any]:
    """Check the headline trends the suite is meant to reproduce."""
    compare_rows = [
        row
        for record in records
        if record["status"] == "ok" and record["kind"] == "compare"
        for row in record["_rows"]
    ]
    by_id: dict[str, dict[str, ComparisonRow]] = {}
    for row in compare_rows:
        by_id.setdefault(row.benchmark_id, {})[row.layout] = row

    def standard_reduction(benchmark_id: str) -> float | None:
        row = by_id.get(benchmark_id, {}).get("standard")
        return row.reduction_percent if row else None

    checks: dict[str, bool | None] = {
        "rcs_6x6_reduction_in_5_30": _band(standard_reduction("rcs_6x6_l500"), 5.0, 30.0),
        "ising_6x6_reduction_in_30_65": _band(standard_reduction("ising_6x6_s1"), 30.0, 65.0),
    }

    ladder = [standard_reduction(f"rcs_{k}x{k}_l500") for k in (6, 8, 10)]
    checks["rcs_reduction_6_lt_8_lt_10"] = (
        None if None in ladder else _strictly_increasing([value for value in ladder if value is not None])
    )

    paired = [pair for pair in by_id.values() if "standard" in pair and "sparse" in pair]
    checks["sparse_beats_standard"] = (
        all(pair["sparse"].lapbc_mean_cycles < pair["standard"].lapbc_mean_cycles for pair in paired)
        if paired
        else None
    )

    fit_rows = sort_rows(
        [
            pair["standard"]
            for benchmark_id, pair in by_id.items()
            if "standard" in pair
            and benchmark_id.startswith("rcs_")
            and benchmark_id.endswith("_l500")
            and 25 <= pair["standard"].n <= 64
        ]
    )
    fit = None
    checks["parallelism_increasing"] = None
    checks["parallelism_linear_r2_ge_0_9"] = None
    checks["parallelism_beats_sqrt_n"] = None
    if len(fit_rows) >= 3:
        fit = parallelism_fit(fit_rows)
        checks["parallelism_increasing"] = _strictly_increasing([row.parallelism for row in fit_rows])
        checks["parallelism_linear_r2_ge_0_9"] = _threshold(fit.r_squared, 0.9)
        checks["parallelism_beats_sqrt_n"] = _strictly_increasing(list(fit.ratios))

    sweeps: dict[str, list[float]] = {}
    for record in records:
        if record["status"] != "ok" or record["kind"] != "sweep":
            continue
        rows = sorted(record["_rows"], key=lambda row: row.p_success)
        means = {row.p_success: row.lapbc_mean_cycles for row in rows}
        sweeps[record["id"]] = [row.lapbc_mean_cycles for row in rows]
        checks[f"{record['id']}_non_increasing"] = all(
            a >= b for a, b in zip(sweeps[record["id"]], sweeps[record["id"]][1:])
        )
        checks[f"{record['id']}_gain_0_1_to_0_4_gt_0_20"] = _above(_improvement(means, 0.1, 0.4), 0.20)
        checks[f"{record['id']}_gain_0_4_to_0_9_lt_0_10"] = _below(_improvement(means, 0.4, 0.9), 0.10)

    decided = [value for value in checks.values() if value is not None]
    return {
        "verdict": "PASS" if decided and all(decided) else ("FAIL" if decided else "INCONCLUSIVE"),
        "checks": checks,
        "parallelism_fit": fit.to_dict() if fit else None,
        "sweep_means": sweeps,
    }


def _threshold(value: float | None, threshold: float) -> bool | None:
    """Internal helper to threshold."""
    if value is None:
        return None
    return value >= threshold


def _above(value: float | None, threshold: float) -> bool | None:
    if value is None:
        return None
    return value > threshold


def _below(value: float | None, threshold: float) -> bool | None:
    if value is None:
        return None
    return value < threshold


def build_summary(
    records: list[dict[str, Any]],
    manifest: dict[str, Any],
    finished_at_utc: str,
) -> dict[str, Any]:
    """Build the JSON-ready suite summary."""
    succeeded = [item for item in records if item["status"] == "ok"]
    failed = [item for item in records if item["status"] == "error"]
    return {
        "manifest": manifest,
        "finished_at_utc": finished_at_utc,
        "total": len(records),
        "succeeded": len(succeeded),
        "failed": len(failed),
        "trends": evaluate_trends(records),
        "entries": [
            {key: value for key, value in item.items() if not key.startswith("_")}
            for item in records
        ],
    }


def run_suite(
    entries: list[SuiteEntry],
    base: RunConfig,
    output_root: Path,
    run_label: str | None = None,
    benchmark_path: Path | None = None,
) -> tuple[Path, dict[str, Any]]:
    """Run every entry and write manifest, rows, summary JSON and markdown to a fresh run dir."""
    if not entries:
        raise ValueError("No benchmark entries selected.")

    from .formatter import build_summary_markdown

    run_dir = create_run_dir(output_root, run_label)
    manifest = {
        "started_at_utc": utc_now(),
        "run_label": run_label,
        "benchmark_file": str(benchmark_path) if benchmark_path else None,
        "entry_ids": [entry.id for entry in entries],
        "base_config": base.to_dict(),
    }
    write_json(run_dir / "manifest.json", manifest)
    entries_dir = run_dir / "entries"
    entries_dir.mkdir()

    records = []
    for index, entry in enumerate(entries, start=1):
        logger.info("[%d/%d] Running %s", index, len(entries), entry.id)
        record = run_entry(entry, base)
        if record["status"] == "error":
            logger.warning("Entry %s failed: %s", entry.id, record["error"]["message"])
        records.append(record)
        write_json(
            entries_dir / f"{safe_slug(entry.id)}.json",
            {key: value for key, value in record.items() if not key.startswith("_")},
        )

    rows = [row for record in records if record["status"] == "ok" for row in record["_rows"]]
    if rows:
        emit_report(rows, run_dir / "rows.csv")

    summary = build_summary(records, manifest, utc_now())
    write_json(run_dir / "summary.json", summary)
    write_text(run_dir / "summary.md", build_summary_markdown(summary, sort_rows(rows)))
    return run_dir, summary


def create_run_dir(output_root: Path, run_label: str | None) -> Path:
    """Create run dir."""
    stamp = datetime.now(timezone.utc).strftime("%Y%m%dT%H%M%SZ")
    suffix = safe_slug(run_label) if run_label else ""
    dirname = f"{stamp}_{suffix}" if suffix else stamp

    run_dir = output_root / dirname
    if run_dir.exists():
        run_dir = output_root / f"{dirname}_1"

    run_dir.mkdir(parents=True, exist_ok=False)
    return run_dir


def safe_slug(value: str | None) -> str:
    """Safe slug."""
    if not value:
        return ""
    slug = re.sub(r"[^a-zA-Z0-9._-]+", "_", value.strip())
    return slug.strip("._-")


def read_nonempty_str(payload: dict[str, Any], key: str, idx: int) -> str:
    """Read nonempty str."""
    value = payload.get(key)
    if not isinstance(value, str) or not value.strip():
        raise ValueError(f"Benchmark item #{idx} field '{key}' must be a non-empty string.")
    return value.strip()


def utc_now() -> str:
    return datetime.now(timezone.utc).isoformat()


def write_json(path: Path, payload: Any) -> None:
    """Write json."""
    path.write_text(json.dumps(payload, indent=2, ensure_ascii=True) + "\n", encoding="utf-8")


def write_text(path: Path, text: str) -> None:
    """Write text."""
    path.write_text(text, encoding="utf-8")
