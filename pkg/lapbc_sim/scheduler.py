"""Greedy lattice-surgery scheduler for LAPBC programs.

Instructions are placed in program order. Each starts no earlier than the
completion of the previous instruction on every qubit it touches, and then at
the first cycle where its routing (and, for π/8 rotations, its distillation
area) fits into the patches left free by everything committed before it.

Placement is equivalent to trying every cycle in turn, but only cycles where
some reservation ends can turn an infeasible placement into a feasible one,
so the search jumps between those.

Instruction anatomy (d = code distance, m = distillation round):
  eighth   Distill on D cells [0, m), LatticeSurgery magic cell + region
           [m, m+d), YMeasure magic cell [m+d, m+(3d+3)/2)
  quarter  LatticeSurgery region + |+> ancilla [0, d), YMeasure ancilla [d, (3d+3)/2)
  meas Y   in-place YMeasure on the data patch, (d+3)/2
  meas X/Z zero-length marker
  init     DataInOp on the data patch, d
"""

from __future__ import annotations

from collections import defaultdict
import csv
from dataclasses import dataclass, field
import io
import logging
from typing import Any, Callable, Iterable

from .isa import EIGHTH, INIT, LAPBC, MEAS, MEASM, QUARTER, IsaInstruction, IsaProgram
from .layout import Cell, Layout, Mapping
from .routing import Occupancy, allocate_distillation, route_surgery


logger = logging.getLogger(__name__)

IDLE_DATA = "IdleData"
DATA_IN_OP = "DataInOp"
VACANT = "Vacant"
LATTICE_SURGERY = "LatticeSurgery"
Y_MEASURE = "YMeasure"
DISTILL = "Distill"
MICRO_KINDS = (IDLE_DATA, DATA_IN_OP, VACANT, LATTICE_SURGERY, Y_MEASURE, DISTILL)
PASSIVE_KINDS = (IDLE_DATA, VACANT)


class SchedulingError(RuntimeError):
    """Raised when an instruction can never be routed on the layout."""


class ScheduleValidationError(ValueError):
    """Raised when a schedule breaks overlap, dependency or lower-bound rules."""


@dataclass(frozen=True)
class ScheduleParams:
    d: int = 15
    m: int = 27
    distill_patches: int = 4
    hold_distill: bool = False

    def __post_init__(self) -> None:
        """Validate ranges."""
        if self.d < 3 or self.d % 2 == 0:
            raise ValueError(f"Code distance must be odd and >= 3, got {self.d}.")
        if self.m < 1:
            raise ValueError("Distillation time m must be >= 1.")
        if self.distill_patches < 1:
            raise ValueError("Distillation patch count D must be >= 1.")

    @property
    def surgery_tail(self) -> int:
        """(3d+3)/2: lattice surgery plus the Y measurement that follows it."""
        return (3 * self.d + 3) // 2

    @property
    def y_measure(self) -> int:
        """(d+3)/2 cycles for an in-place Y measurement."""
        return (self.d + 3) // 2

    def to_dict(self) -> dict[str, Any]:
        return {
            "d": self.d,
            "m": self.m,
            "distill_patches": self.distill_patches,
            "hold_distill": self.hold_distill,
        }


def is_y_measurement(instr: IsaInstruction) -> bool:
    return instr.kind == MEAS and bool(instr.axis.xs & instr.axis.zs)


def duration(instr: IsaInstruction, params: ScheduleParams) -> int:
    """Scheduled cycle cost of one LAPBC instruction."""
    if instr.kind == QUARTER:
        return params.surgery_tail
    if instr.kind == EIGHTH:
        return params.m + params.surgery_tail
    if instr.kind == MEAS:
        return params.y_measure if is_y_measurement(instr) else 0
    if instr.kind in (INIT, MEASM):
        return params.d
    raise ValueError(f"No duration for instruction kind {instr.kind!r}.")


@dataclass(frozen=True)
class Phase:
    kind: str
    cells: tuple[Cell, ...]
    start: int
    end: int
    joins_data: bool = False

    def to_dict(self) -> dict[str, Any]:
        return {
            "kind": self.kind,
            "cells": [list(cell) for cell in self.cells],
            "start": self.start,
            "end": self.end,
            "joins_data": self.joins_data,
        }


@dataclass(frozen=True)
class InstructionRecord:
    id: int
    instruction: IsaInstruction
    start: int
    duration: int
    qubits: tuple[int, ...]
    data_cells: tuple[Cell, ...]
    routing_cells: tuple[Cell, ...] = ()
    distill_cells: tuple[Cell, ...] = ()
    held_cells: tuple[Cell, ...] = ()
    phases: tuple[Phase, ...] = ()

    @property
    def end(self) -> int:
        return self.start + self.duration

    def involved_cells(self) -> tuple[Cell, ...]:
        return tuple(sorted(set(self.data_cells) | set(self.routing_cells) | set(self.distill_cells)))

    def to_dict(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "instruction": self.instruction.to_text(),
            "start": self.start,
            "duration": self.duration,
            "qubits": list(self.qubits),
            "data_cells": [list(cell) for cell in self.data_cells],
            "routing_cells": [list(cell) for cell in self.routing_cells],
            "distill_cells": [list(cell) for cell in self.distill_cells],
            "held_cells": [list(cell) for cell in self.held_cells],
            "phases": [phase.to_dict() for phase in self.phases],
        }

    @staticmethod
    def from_dict(payload: dict[str, Any]) -> "InstructionRecord":
        def cells(key: str) -> tuple[Cell, ...]:
            return tuple((int(r), int(c)) for r, c in payload.get(key, []))

        return InstructionRecord(
            id=int(payload["id"]),
            instruction=IsaInstruction.parse(payload["instruction"]),
            start=int(payload["start"]),
            duration=int(payload["duration"]),
            qubits=tuple(int(q) for q in payload["qubits"]),
            data_cells=cells("data_cells"),
            routing_cells=cells("routing_cells"),
            distill_cells=cells("distill_cells"),
            held_cells=cells("held_cells"),
            phases=tuple(
                Phase(
                    kind=phase["kind"],
                    cells=tuple((int(r), int(c)) for r, c in phase["cells"]),
                    start=int(phase["start"]),
                    end=int(phase["end"]),
                    joins_data=bool(phase.get("joins_data", False)),
                )
                for phase in payload.get("phases", [])
            ),
        )


@dataclass(frozen=True)
class Microinstruction:
    patch: Cell
    start: int
    end: int
    kind: str
    group: int | None = None


@dataclass(frozen=True)
class Schedule:
    params: ScheduleParams
    layout: Layout
    mapping: Mapping
    records: tuple[InstructionRecord, ...] = field(default_factory=tuple)

    @property
    def makespan(self) -> int:
        return max((record.end for record in self.records), default=0)

    def busy_microinstructions(self) -> list[Microinstruction]:
        """Every non-passive microinstruction, ordered by (start, patch)."""
        micros: list[Microinstruction] = []
        for record in self.records:
            if record.duration == 0:
                continue
            data_kind = Y_MEASURE if is_y_measurement(record.instruction) else DATA_IN_OP
            for cell in record.data_cells:
                micros.append(Microinstruction(cell, record.start, record.end, data_kind, record.id))
            held = set(record.held_cells)
            for phase in record.phases:
                for cell in phase.cells:
                    end = record.end if phase.kind == DISTILL and cell in held else phase.end
                    micros.append(Microinstruction(cell, phase.start, end, phase.kind, record.id))
        micros.sort(key=lambda micro: (micro.start, micro.patch, micro.end))
        return micros

    def timelines(self) -> dict[Cell, list[Microinstruction]]:
        """Per-patch timelines over [0, makespan), gaps filled with IdleData / Vacant."""
        busy: dict[Cell, list[Microinstruction]] = defaultdict(list)
        for micro in self.busy_microinstructions():
            busy[micro.patch].append(micro)
        horizon = self.makespan
        out: dict[Cell, list[Microinstruction]] = {}
        for cell in self.layout.cells():
            filler = IDLE_DATA if self.layout.is_data(cell) else VACANT
            timeline: list[Microinstruction] = []
            cursor = 0
            for micro in sorted(busy.get(cell, []), key=lambda item: item.start):
                if micro.start > cursor:
                    timeline.append(Microinstruction(cell, cursor, micro.start, filler))
                timeline.append(micro)
                cursor = max(cursor, micro.end)
            if cursor < horizon:
                timeline.append(Microinstruction(cell, cursor, horizon, filler))
            out[cell] = timeline
        return out

    def at_cycle(self, cycle: int) -> dict[Cell, Microinstruction]:
        """The microinstruction covering `cycle` on every patch."""
        snapshot = {}
        for cell, timeline in self.timelines().items():
            for micro in timeline:
                if micro.start <= cycle < micro.end:
                    snapshot[cell] = micro
                    break
        return snapshot

    def to_csv(self) -> str:
        """Per-patch timelines as CSV (patch_row, patch_col, start, end, kind, instruction_id)."""
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(["patch_row", "patch_col", "start", "end", "kind", "instruction_id"])
        for cell, timeline in sorted(self.timelines().items()):
            for micro in timeline:
                group = "" if micro.group is None else micro.group
                writer.writerow([cell[0], cell[1], micro.start, micro.end, micro.kind, group])
        return buffer.getvalue()

    def to_dict(self) -> dict[str, Any]:
        return {
            "params": self.params.to_dict(),
            "layout": {
                "kind": self.layout.kind,
                "rows": self.layout.rows,
                "cols": self.layout.cols,
                "grid": self.layout.render().splitlines(),
            },
            "mapping": {str(q): list(cell) for q, cell in sorted(self.mapping.assignment.items())},
            "makespan": self.makespan,
            "instructions": [record.to_dict() for record in self.records],
        }

    @staticmethod
    def from_dict(payload: dict[str, Any]) -> "Schedule":
        params = payload["params"]
        layout_payload = payload["layout"]
        layout = Layout.from_rows(layout_payload["grid"], kind=layout_payload.get("kind", "custom"))
        return Schedule(
            params=ScheduleParams(
                d=int(params["d"]),
                m=int(params["m"]),
                distill_patches=int(params["distill_patches"]),
                hold_distill=bool(params.get("hold_distill", False)),
            ),
            layout=layout,
            mapping=Mapping(
                {int(q): (int(cell[0]), int(cell[1])) for q, cell in payload["mapping"].items()}
            ),
            records=tuple(InstructionRecord.from_dict(item) for item in payload["instructions"]),
        )


@dataclass(frozen=True)
class _Plan:
    phases: tuple[Phase, ...]
    routing_cells: tuple[Cell, ...] = ()
    distill_cells: tuple[Cell, ...] = ()
    held: tuple[Cell, ...] = ()


class _Placer:
    """Search state for one scheduling pass."""

    def __init__(self, layout: Layout, params: ScheduleParams) -> None:
        self.layout = layout
        self.params = params
        self.occupancy = Occupancy()

    def window(self, start: int, end: int) -> Callable[[Cell], bool]:
        occupancy = self.occupancy
        return lambda cell: occupancy.is_free(cell, start, end)

    def offsets(self, instr: IsaInstruction) -> tuple[int, ...]:
        if instr.kind == EIGHTH:
            return (0, self.params.m)
        return (0,)

    def plan(self, instr: IsaInstruction, cells: list[Cell], t: int, dur: int) -> _Plan | None:
        if any(not self.occupancy.is_free(cell, t, t + dur) for cell in cells):
            return None
        if instr.kind == QUARTER:
            return self._plan_quarter(instr, cells, t, dur)
        if instr.kind == EIGHTH:
            return self._plan_eighth(instr, cells[0], t, dur)
        if instr.kind == INIT:
            return _Plan(phases=(Phase(DATA_IN_OP, (), t, t + dur, joins_data=True),))
        if is_y_measurement(instr):
            return _Plan(phases=(Phase(Y_MEASURE, (), t, t + dur, joins_data=True),))
        raise SchedulingError(f"Instruction {instr.to_text()!r} cannot be scheduled on LAPBC patches.")

    def _plan_quarter(self, instr: IsaInstruction, cells: list[Cell], t: int, dur: int) -> _Plan | None:
        d = self.params.d
        axes = [instr.axis.axis_of(q) for q in sorted(instr.axis.support())]
        region = route_surgery(self.layout, self.window(t, t + d), list(zip(cells, axes)))
        if region is None:
            return None
        full = self.window(t, t + dur)
        # Ancillas next to few data patches leave the data edges open for others.
        candidates = [cell for cell in region if full(cell)]
        if not candidates:
            anchors = region if region else cells
            candidates = [
                other
                for anchor in anchors
                for other in self.layout.neighbors(anchor)
                if self.layout.is_routing(other) and other not in region and full(other)
            ]
        if not candidates:
            return None
        ancilla = min(candidates, key=lambda cell: (self.layout.data_degree(cell), cell))
        surgery = tuple(sorted(set(region) | {ancilla}))
        return _Plan(
            phases=(
                Phase(LATTICE_SURGERY, surgery, t, t + d, joins_data=True),
                Phase(Y_MEASURE, (ancilla,), t + d, t + dur),
            ),
            routing_cells=surgery,
        )

    def _plan_eighth(self, instr: IsaInstruction, target: Cell, t: int, dur: int) -> _Plan | None:
        params = self.params
        m, d = params.m, params.d
        distill_end = t + dur if params.hold_distill else t + m
        allocation = allocate_distillation(
            self.layout,
            target,
            instr.axis.axis_of(next(iter(instr.axis.support()))),
            params.distill_patches,
            distill_free=self.window(t, distill_end),
            magic_free=self.window(t, t + dur),
            surgery_free=self.window(t + m, t + m + d),
            hold=params.hold_distill,
        )
        if allocation is None:
            return None
        magic = allocation.magic
        surgery = tuple(sorted(set(allocation.region) | {magic}))
        distill = tuple(sorted(allocation.cells))
        held = tuple(cell for cell in distill if cell != magic) if params.hold_distill else ()
        return _Plan(
            phases=(
                Phase(DISTILL, distill, t, t + m),
                Phase(LATTICE_SURGERY, surgery, t + m, t + m + d, joins_data=True),
                Phase(Y_MEASURE, (magic,), t + m + d, t + dur),
            ),
            routing_cells=surgery,
            distill_cells=distill,
            held=held,
        )

    def commit(self, record: InstructionRecord) -> None:
        held = set(record.held_cells)
        for cell in record.data_cells:
            self.occupancy.reserve(cell, record.start, record.end)
        for phase in record.phases:
            for cell in phase.cells:
                end = record.end if cell in held and phase.kind == DISTILL else phase.end
                self.occupancy.reserve(cell, phase.start, end)


def schedule(
    program: IsaProgram,
    layout: Layout,
    mapping: Mapping,
    params: ScheduleParams,
) -> Schedule:
    """Place every instruction of a LAPBC program on the layout."""
    if program.flavor != LAPBC:
        raise SchedulingError(f"Scheduler expects a LAPBC program, got {program.flavor}.")
    mapping.require(program.qubit_count)
    for qubit, cell in mapping.assignment.items():
        if not layout.is_data(cell):
            raise SchedulingError(f"Qubit {qubit} is mapped to non-data patch {cell}.")

    placer = _Placer(layout, params)
    ready: dict[int, int] = defaultdict(int)
    records: list[InstructionRecord] = []
    for index, instr in enumerate(program.instructions):
        qubits = tuple(sorted(instr.support()))
        cells = [mapping.cell_of(q) for q in qubits]
        dur = duration(instr, params)
        t = max(ready[q] for q in qubits)

        if dur == 0:
            record = InstructionRecord(index, instr, t, 0, qubits, tuple(cells))
        else:
            plan = _search(placer, instr, cells, t, dur)
            record = InstructionRecord(
                id=index,
                instruction=instr,
                start=plan[0],
                duration=dur,
                qubits=qubits,
                data_cells=tuple(cells),
                routing_cells=plan[1].routing_cells,
                distill_cells=plan[1].distill_cells,
                held_cells=tuple(cells) + plan[1].held,
                phases=plan[1].phases,
            )
            placer.commit(record)
        for q in qubits:
            ready[q] = record.end
        records.append(record)
        if (index + 1) % 1000 == 0:
            logger.debug("Scheduled %d/%d instructions (cycle %d).", index + 1, len(program.instructions), record.end)

    return Schedule(params=params, layout=layout, mapping=mapping, records=tuple(records))


def _search(placer: _Placer, instr: IsaInstruction, cells: list[Cell], t: int, dur: int) -> tuple[int, _Plan]:
    """First cycle >= t where the instruction fits."""
    offsets = placer.offsets(instr)
    while True:
        plan = placer.plan(instr, cells, t, dur)
        if plan is not None:
            return t, plan
        candidates = []
        for offset in offsets:
            end = placer.occupancy.next_end_after(t + offset)
            if end is not None:
                candidates.append(end - offset)
        if not candidates:
            raise SchedulingError(
                f"No routing for {instr.to_text()!r} even on an idle layout; "
                "check that routing patches connect every data patch edge."
            )
        t = min(candidates)


def qubit_lower_bound(schedule: Schedule) -> int:
    """Largest per-qubit sum of instruction durations."""
    totals: dict[int, int] = defaultdict(int)
    for record in schedule.records:
        for q in record.qubits:
            totals[q] += record.duration
    return max(totals.values(), default=0)


def critical_path(instructions: Iterable[IsaInstruction], params: ScheduleParams) -> int:
    """Makespan on an unlimited grid: each instruction waits only for its own qubits."""
    ready: dict[int, int] = defaultdict(int)
    for instr in instructions:
        qubits = instr.support()
        end = max((ready[q] for q in qubits), default=0) + duration(instr, params)
        for q in qubits:
            ready[q] = end
    return max(ready.values(), default=0)


def validate_schedule(schedule: Schedule) -> None:
    """Check patch exclusivity, per-qubit program order and the dependency lower bounds."""
    last_end: dict[Cell, tuple[int, int]] = {}
    for micro in sorted(schedule.busy_microinstructions(), key=lambda item: (item.patch, item.start)):
        previous = last_end.get(micro.patch)
        if previous is not None and micro.start < previous[0]:
            raise ScheduleValidationError(
                f"Patch {micro.patch}: instruction {micro.group} starts at {micro.start} "
                f"before instruction {previous[1]} releases it at {previous[0]}."
            )
        last_end[micro.patch] = (micro.end, micro.group)

    finished: dict[int, InstructionRecord] = {}
    for record in schedule.records:
        for q in record.qubits:
            earlier = finished.get(q)
            if earlier is not None and record.start < earlier.end:
                raise ScheduleValidationError(
                    f"Qubit {q}: instruction {record.id} starts at {record.start} "
                    f"before instruction {earlier.id} ends at {earlier.end}."
                )
            finished[q] = record

    bound = qubit_lower_bound(schedule)
    if schedule.makespan < bound:
        raise ScheduleValidationError(
            f"Makespan {schedule.makespan} is below the per-qubit bound {bound}."
        )
    path = critical_path((record.instruction for record in schedule.records), schedule.params)
    if schedule.makespan < path:
        raise ScheduleValidationError(
            f"Makespan {schedule.makespan} is below the dependency critical path {path}."
        )
