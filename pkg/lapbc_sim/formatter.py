"""Text renderings of schedules, comparison rows and suite summaries."""

from __future__ import annotations

from typing import TYPE_CHECKING, Any, Sequence

from .scheduler import (
    DATA_IN_OP,
    DISTILL,
    IDLE_DATA,
    LATTICE_SURGERY,
    VACANT,
    Y_MEASURE,
    Schedule,
)

if TYPE_CHECKING:
    from .experiments import ComparisonRow


SNAPSHOT_GLYPHS = {
    IDLE_DATA: "d",
    DATA_IN_OP: "Q",
    VACANT: ".",
    LATTICE_SURGERY: "L",
    Y_MEASURE: "Y",
    DISTILL: "M",
}


def render_snapshot(schedule: Schedule, cycle: int) -> str:
    """Patch grid at one cycle: kind glyph plus instruction id on busy patches, then a legend."""
    if cycle < 0:
        raise ValueError("Snapshot cycle must be >= 0.")
    snapshot = schedule.at_cycle(cycle)
    layout = schedule.layout
    tokens: list[list[str]] = []
    for row in range(layout.rows):
        line = []
        for col in range(layout.cols):
            micro = snapshot.get((row, col))
            if micro is None:
                line.append("d" if layout.is_data((row, col)) else ".")
            elif micro.group is None:
                line.append(SNAPSHOT_GLYPHS[micro.kind])
            else:
                line.append(f"{SNAPSHOT_GLYPHS[micro.kind]}{micro.group}")
        tokens.append(line)
    width = max((len(token) for line in tokens for token in line), default=1)

    lines = [f"cycle {cycle} / makespan {schedule.makespan}"]
    lines.extend(" ".join(token.ljust(width) for token in line).rstrip() for line in tokens)
    lines.append("legend: " + " ".join(f"{glyph}={kind}" for kind, glyph in SNAPSHOT_GLYPHS.items()))
    return "\n".join(lines)


def format_rows(rows: Sequence["ComparisonRow"]) -> str:
    """Markdown table of comparison rows."""
    lines = [
        "| Benchmark | Layout | N | p | SPC cycles | LAPBC mean | LAPBC sd | Parallelism | Reduction % |",
        "| --- | --- | ---: | ---: | ---: | ---: | ---: | ---: | ---: |",
    ]
    for row in rows:
        lines.append(
            f"| {row.benchmark_id} | {row.layout} | {row.n} | {row.p_success:g} | {row.spc_cycles} | "
            f"{row.lapbc_mean_cycles:.1f} | {row.lapbc_stddev:.1f} | {row.parallelism:.3f} | "
            f"{row.reduction_percent:.2f} |"
        )
    return "\n".join(lines)


def _check_label(value: bool | None) -> str:
    if value is None:
        return "n/a"
    return "pass" if value else "fail"


def build_summary_markdown(summary: dict[str, Any], rows: Sequence["ComparisonRow"]) -> str:
    """Build summary markdown."""
    trends = summary["trends"]
    lines: list[str] = []
    lines.append("# LAPBC vs SPC Suite Summary")
    lines.append("")
    lines.append(f"- Total: {summary['total']}")
    lines.append(f"- Succeeded: {summary['succeeded']}")
    lines.append(f"- Failed: {summary['failed']}")
    lines.append(f"- Trend verdict: {trends['verdict']}")
    lines.append("")
    if rows:
        lines.append(format_rows(rows))
        lines.append("")

    lines.append("| Check | Result |")
    lines.append("| --- | --- |")
    for name, value in trends["checks"].items():
        lines.append(f"| {name} | {_check_label(value)} |")

    fit = trends.get("parallelism_fit")
    if fit:
        lines.append("")
        lines.append(
            f"Parallelism fit: {fit['slope']:.4f}·N + {fit['intercept']:.4f} (R² = {fit['r_squared']:.3f})"
        )

    failures = [item for item in summary["entries"] if item["status"] == "error"]
    if failures:
        lines.append("")
        lines.append("| ID | Stage | Error |")
        lines.append("| --- | --- | --- |")
        for item in failures:
            lines.append(f"| {item['id']} | {item['error']['stage']} | {item['error']['message']} |")

    return "\n".join(lines) + "\n"
