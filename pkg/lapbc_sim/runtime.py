"""Stochastic execution of a schedule under distillation retries.

Each π/8 rotation runs D distillations in parallel; a round succeeds when any
of them does, so the number of rounds is the minimum of D Geometric(p) draws.
The distill phase then takes m·rounds cycles instead of m.

Delays propagate through patches only:
  - a phase waits for every earlier phase on each patch it occupies
  - lattice surgery also waits for its data patches, which stay busy until
    their instruction finishes
Passive idle and vacant stretches absorb nothing and delay nothing.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
import csv
from dataclasses import dataclass
import io
import logging
from typing import Any, Mapping, Sequence

import numpy as np

from .isa import EIGHTH
from .layout import Cell
from .scheduler import DISTILL, InstructionRecord, Phase, Schedule, ScheduleParams


logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RuntimeParams:
    p_success: float = 0.25
    seed: int = 0
    trials: int = 1

    def __post_init__(self) -> None:
        """Validate ranges."""
        if not 0.0 < self.p_success <= 1.0:
            raise ValueError(f"p_success must lie in (0, 1], got {self.p_success}.")
        if self.trials < 1:
            raise ValueError("trials must be >= 1.")


@dataclass(frozen=True)
class RuntimeResult:
    total_cycles: int
    starts: tuple[int, ...]
    ends: tuple[int, ...]
    delayed_distills: int
    added_cycles: int
    distill_delay_cycles: int

    def to_dict(self) -> dict[str, Any]:
        return {
            "total_cycles": self.total_cycles,
            "delayed_distills": self.delayed_distills,
            "added_cycles": self.added_cycles,
            "distill_delay_cycles": self.distill_delay_cycles,
        }


@dataclass(frozen=True)
class RuntimeSummary:
    count: int
    mean: float
    stddev: float
    minimum: int
    maximum: int

    def to_dict(self) -> dict[str, Any]:
        return {
            "count": self.count,
            "mean": self.mean,
            "stddev": self.stddev,
            "min": self.minimum,
            "max": self.maximum,
        }


def sample_distill_rounds(
    p: float,
    D: int,
    rng: np.random.Generator,
    size: int | None = None,
) -> int | np.ndarray:
    """Rounds until one of D parallel distillations succeeds."""
    if not 0.0 < p <= 1.0:
        raise ValueError(f"p must lie in (0, 1], got {p}.")
    if D < 1:
        raise ValueError("D must be >= 1.")
    if size is None:
        return int(rng.geometric(p, size=D).min())
    return rng.geometric(p, size=(size, D)).min(axis=1)


def expected_rounds(p: float, D: int) -> float:
    """Closed-form mean of sample_distill_rounds: 1 / (1 - (1-p)^D)."""
    return 1.0 / (1.0 - (1.0 - p) ** D)


def simulate(
    schedule: Schedule,
    params: ScheduleParams,
    rt: RuntimeParams,
    *,
    rng: np.random.Generator | None = None,
    forced_rounds: Mapping[int, int] | None = None,
) -> RuntimeResult:
    """Realize one execution of `schedule` with sampled distillation rounds."""
    if rng is None:
        rng = np.random.default_rng(rt.seed)
    records = schedule.records
    eighth_ids = [record.id for record in records if record.instruction.kind == EIGHTH]
    sampled = sample_distill_rounds(rt.p_success, params.distill_patches, rng, size=len(eighth_ids))
    rounds = {record_id: int(value) for record_id, value in zip(eighth_ids, sampled)}
    if forced_rounds:
        for record_id, value in forced_rounds.items():
            if value < 1:
                raise ValueError("Forced rounds must be >= 1.")
            rounds[record_id] = int(value)

    events: list[tuple[int, int, int, InstructionRecord, Phase | None]] = []
    for record in records:
        if not record.phases:
            events.append((record.start, record.id, 0, record, None))
        for index, phase in enumerate(record.phases):
            events.append((phase.start, record.id, index, record, phase))
    events.sort(key=lambda event: (event[0], event[1], event[2]))

    ready: dict[Cell, int] = {}
    cursor: dict[int, int] = {}
    starts: dict[int, int] = {}
    ends: dict[int, int] = {}
    for scheduled_start, record_id, index, record, phase in events:
        if phase is None:
            moment = max([scheduled_start] + [ready.get(cell, 0) for cell in record.data_cells])
            starts[record_id] = ends[record_id] = moment
            for cell in record.data_cells:
                ready[cell] = moment
            continue

        waits = [scheduled_start, cursor.get(record_id, 0)]
        waits.extend(ready.get(cell, 0) for cell in phase.cells)
        if phase.joins_data:
            waits.extend(ready.get(cell, 0) for cell in record.data_cells)
        start = max(waits)
        length = phase.end - phase.start
        if phase.kind == DISTILL:
            length += params.m * (rounds.get(record_id, 1) - 1)
        end = start + length

        if index == 0:
            starts[record_id] = start
        held = set(record.held_cells)
        for cell in phase.cells:
            if cell not in held:
                ready[cell] = end
        cursor[record_id] = end
        if index == len(record.phases) - 1:
            ends[record_id] = end
            for cell in record.held_cells:
                ready[cell] = end

    total = max(ends.values(), default=0)
    delayed = sum(1 for value in rounds.values() if value > 1)
    return RuntimeResult(
        total_cycles=total,
        starts=tuple(starts[record.id] for record in records),
        ends=tuple(ends[record.id] for record in records),
        delayed_distills=delayed,
        added_cycles=total - schedule.makespan,
        distill_delay_cycles=sum(params.m * (value - 1) for value in rounds.values()),
    )


def _run_trial(
    schedule: Schedule,
    params: ScheduleParams,
    rt: RuntimeParams,
    seed_sequence: np.random.SeedSequence,
) -> RuntimeResult:
    return simulate(schedule, params, rt, rng=np.random.default_rng(seed_sequence))


def run_trials(
    schedule: Schedule,
    params: ScheduleParams,
    rt: RuntimeParams,
    workers: int = 1,
) -> list[RuntimeResult]:
    """Independent trials with sub-seeds spawned from rt.seed, in trial order."""
    children = np.random.SeedSequence(rt.seed).spawn(rt.trials)
    if workers <= 1 or rt.trials == 1:
        return [_run_trial(schedule, params, rt, child) for child in children]
    logger.debug("Running %d trials on %d workers.", rt.trials, workers)
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(
            pool.map(
                _run_trial,
                [schedule] * rt.trials,
                [params] * rt.trials,
                [rt] * rt.trials,
                children,
                chunksize=max(1, rt.trials // (4 * workers)),
            )
        )


def summarize(results: Sequence[RuntimeResult | int]) -> RuntimeSummary:
    """Mean, sample standard deviation, min and max of total cycles."""
    if not results:
        raise ValueError("Cannot summarize an empty result list.")
    totals = np.array(
        [item.total_cycles if isinstance(item, RuntimeResult) else int(item) for item in results],
        dtype=float,
    )
    stddev = float(totals.std(ddof=1)) if totals.size > 1 else 0.0
    return RuntimeSummary(
        count=int(totals.size),
        mean=float(totals.mean()),
        stddev=stddev,
        minimum=int(totals.min()),
        maximum=int(totals.max()),
    )


def results_csv(results: Sequence[RuntimeResult]) -> str:
    """CSV with columns trial, total_cycles, delayed_distills, added_cycles."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["trial", "total_cycles", "delayed_distills", "added_cycles"])
    for trial, result in enumerate(results):
        writer.writerow([trial, result.total_cycles, result.delayed_distills, result.added_cycles])
    return buffer.getvalue()
