"""Patch-grid layouts, qubit mappings and the SPC patch-count formula.

A layout is a rows x cols grid whose cells are data patches or routing patches.
Orientation: the north/south edges of a data patch carry its logical Z operator,
the east/west edges its logical X operator; a Y access needs one of each.

Standard layout: data patches in 2x2 blocks, one routing lane between blocks
(lanes on rows and columns with index mod 3 == 1), about 2.25 patches per qubit.
Sparse layout: data on even/even cells, routing everywhere else, 4 per qubit.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
import logging
import math
import re
from typing import Iterable, Iterator

import networkx as nx


logger = logging.getLogger(__name__)

Cell = tuple[int, int]

DATA = "D"
ROUTING = "R"
STANDARD = "standard"
SPARSE = "sparse"
LAYOUT_KINDS = (STANDARD, SPARSE)

NORTH = (-1, 0)
SOUTH = (1, 0)
WEST = (0, -1)
EAST = (0, 1)
# N/S edges expose Z, E/W edges expose X.
EDGE_SIDES = {"Z": (NORTH, SOUTH), "X": (WEST, EAST)}


class LayoutError(ValueError):
    """Raised for malformed layouts or grid specifications."""


class MappingError(ValueError):
    """Raised for invalid qubit-to-patch mappings."""


@dataclass(frozen=True)
class Layout:
    rows: int
    cols: int
    roles: tuple[str, ...]
    kind: str = "custom"

    def __post_init__(self) -> None:
        """Validate dimensions and roles."""
        if self.rows < 1 or self.cols < 1:
            raise LayoutError(f"Layout must be at least 1x1, got {self.rows}x{self.cols}.")
        if len(self.roles) != self.rows * self.cols:
            raise LayoutError("Role grid size does not match rows x cols.")
        if any(role not in (DATA, ROUTING) for role in self.roles):
            raise LayoutError("Roles must be 'D' or 'R'.")

    @staticmethod
    def from_rows(lines: Iterable[str], kind: str = "custom") -> "Layout":
        """Build a layout from strings such as ["DRD", "RRR"]."""
        grid = [line.strip() for line in lines if line.strip()]
        if not grid or len({len(line) for line in grid}) != 1:
            raise LayoutError("Layout rows must be non-empty and of equal width.")
        return Layout(len(grid), len(grid[0]), tuple("".join(grid)), kind=kind)

    @cached_property
    def data_cells(self) -> tuple[Cell, ...]:
        """Data cells in row-major order."""
        return tuple(cell for cell in self.cells() if self.role(cell) == DATA)

    @cached_property
    def routing_cells(self) -> tuple[Cell, ...]:
        return tuple(cell for cell in self.cells() if self.role(cell) == ROUTING)

    @property
    def total_cells(self) -> int:
        return self.rows * self.cols

    def cells(self) -> Iterator[Cell]:
        for row in range(self.rows):
            for col in range(self.cols):
                yield (row, col)

    def in_bounds(self, cell: Cell) -> bool:
        return 0 <= cell[0] < self.rows and 0 <= cell[1] < self.cols

    def role(self, cell: Cell) -> str:
        return self.roles[cell[0] * self.cols + cell[1]]

    def is_data(self, cell: Cell) -> bool:
        return self.in_bounds(cell) and self.role(cell) == DATA

    def is_routing(self, cell: Cell) -> bool:
        return self.in_bounds(cell) and self.role(cell) == ROUTING

    def neighbors(self, cell: Cell) -> list[Cell]:
        """In-bounds 4-neighbors in N, W, E, S order (lexicographic)."""
        row, col = cell
        out = []
        for dr, dc in (NORTH, WEST, EAST, SOUTH):
            other = (row + dr, col + dc)
            if self.in_bounds(other):
                out.append(other)
        return out

    def edge_neighbors(self, cell: Cell, axis: str) -> list[Cell]:
        """Routing cells across the edges of `cell` exposing `axis` (X or Z)."""
        row, col = cell
        out = []
        for dr, dc in EDGE_SIDES[axis]:
            other = (row + dr, col + dc)
            if self.is_routing(other):
                out.append(other)
        return sorted(out)

    def data_degree(self, cell: Cell) -> int:
        """Number of data patches edge-adjacent to `cell`."""
        return sum(1 for other in self.neighbors(cell) if self.is_data(other))

    @cached_property
    def routing_graph(self) -> nx.Graph:
        """Grid graph over routing cells."""
        graph = nx.Graph()
        graph.add_nodes_from(self.routing_cells)
        for row, col in self.routing_cells:
            for other in ((row + 1, col), (row, col + 1)):
                if self.is_routing(other):
                    graph.add_edge((row, col), other)
        return graph

    def render(self) -> str:
        """One character per cell, one line per row."""
        return "\n".join(
            "".join(self.roles[row * self.cols:(row + 1) * self.cols]) for row in range(self.rows)
        )


def _standard_index(position: int) -> int | None:
    """Data row/col index of a standard-layout coordinate, None on a lane."""
    residue = position % 3
    if residue == 1:
        return None
    return 2 * (position // 3) + (0 if residue == 0 else 1)


def gen_standard(a: int, b: int) -> Layout:
    """Standard layout for an a x b logical grid: 3⌈a/2⌉ x 3⌈b/2⌉ patches."""
    if a < 1 or b < 1:
        raise LayoutError(f"Data grid must be at least 1x1, got {a}x{b}.")
    rows = 3 * math.ceil(a / 2)
    cols = 3 * math.ceil(b / 2)
    roles = []
    for row in range(rows):
        row_index = _standard_index(row)
        for col in range(cols):
            col_index = _standard_index(col)
            is_data = (
                row_index is not None
                and col_index is not None
                and row_index < a
                and col_index < b
            )
            roles.append(DATA if is_data else ROUTING)
    return Layout(rows, cols, tuple(roles), kind=STANDARD)


def gen_sparse(a: int, b: int) -> Layout:
    """Sparse layout for an a x b logical grid: 2a x 2b patches."""
    if a < 1 or b < 1:
        raise LayoutError(f"Data grid must be at least 1x1, got {a}x{b}.")
    rows, cols = 2 * a, 2 * b
    roles = tuple(
        DATA if row % 2 == 0 and col % 2 == 0 else ROUTING
        for row in range(rows)
        for col in range(cols)
    )
    return Layout(rows, cols, roles, kind=SPARSE)


def build_layout(kind: str, a: int, b: int) -> Layout:
    """Dispatch on layout kind."""
    if kind == STANDARD:
        return gen_standard(a, b)
    if kind == SPARSE:
        return gen_sparse(a, b)
    raise LayoutError(f"Unknown layout kind {kind!r}; expected one of {LAYOUT_KINDS}.")


def parse_grid(text: str) -> tuple[int, int]:
    """Parse `AxB` into (a, b)."""
    match = re.fullmatch(r"\s*(\d+)\s*[xX]\s*(\d+)\s*", text or "")
    if not match:
        raise LayoutError(f"Grid must look like AxB, got {text!r}.")
    a, b = int(match.group(1)), int(match.group(2))
    if a < 1 or b < 1:
        raise LayoutError(f"Grid dimensions must be positive, got {text!r}.")
    return a, b


def spc_patch_count(n: int) -> int:
    """⌈2N + √(8N) + 1⌉ patches for an N-qubit SPC layout, factories excluded."""
    if n < 1:
        raise LayoutError("N must be at least 1.")
    root = math.isqrt(8 * n)
    if root * root < 8 * n:
        root += 1
    return 2 * n + 1 + root


def check_connectivity(layout: Layout) -> bool:
    """Routing cells connected, and every data cell touches routing on both edge kinds."""
    graph = layout.routing_graph
    if graph.number_of_nodes() == 0 or not nx.is_connected(graph):
        return False
    return all(
        layout.edge_neighbors(cell, "Z") and layout.edge_neighbors(cell, "X")
        for cell in layout.data_cells
    )


@dataclass(frozen=True)
class Mapping:
    assignment: dict[int, Cell] = field(default_factory=dict)

    def __post_init__(self) -> None:
        """Check injectivity."""
        if len(set(self.assignment.values())) != len(self.assignment):
            raise MappingError("Mapping must be injective.")

    def cell_of(self, qubit: int) -> Cell:
        try:
            return self.assignment[qubit]
        except KeyError as exc:
            raise MappingError(f"Qubit {qubit} is not mapped.") from exc

    @cached_property
    def qubit_at(self) -> dict[Cell, int]:
        return {cell: qubit for qubit, cell in self.assignment.items()}

    def require(self, qubit_count: int) -> None:
        """Every qubit of a `qubit_count` register must be mapped."""
        missing = [q for q in range(qubit_count) if q not in self.assignment]
        if missing:
            raise MappingError(f"Unmapped qubits: {missing[:10]}")
        extra = sorted(q for q in self.assignment if q >= qubit_count)
        if extra:
            logger.warning("Mapping assigns %d qubit(s) the program never uses.", len(extra))

    def to_text(self) -> str:
        lines = [f"{q} {r} {c}" for q, (r, c) in sorted(self.assignment.items())]
        return "\n".join(lines) + "\n"


def default_mapping(layout: Layout, qubit_count: int | None = None) -> Mapping:
    """Assign qubits to data cells in row-major order."""
    count = len(layout.data_cells) if qubit_count is None else qubit_count
    if count > len(layout.data_cells):
        raise MappingError(
            f"Layout has {len(layout.data_cells)} data patches, program needs {count}."
        )
    return Mapping({q: layout.data_cells[q] for q in range(count)})


def parse_mapping(text: str, layout: Layout) -> Mapping:
    """Parse `<qubit> <row> <col>` lines against a layout."""
    assignment: dict[int, Cell] = {}
    used: dict[Cell, int] = {}
    for line_number, raw_line in enumerate(text.splitlines(), start=1):
        content = raw_line.split("#", 1)[0].strip()
        if not content:
            continue
        tokens = content.split()
        if len(tokens) != 3:
            raise MappingError(f"line {line_number}: expected '<qubit> <row> <col>'")
        try:
            qubit, row, col = (int(token) for token in tokens)
        except ValueError as exc:
            raise MappingError(f"line {line_number}: non-integer field") from exc
        cell = (row, col)
        if qubit < 0:
            raise MappingError(f"line {line_number}: negative qubit index {qubit}")
        if not layout.in_bounds(cell):
            raise MappingError(f"line {line_number}: cell {cell} outside {layout.rows}x{layout.cols} layout")
        if not layout.is_data(cell):
            raise MappingError(f"line {line_number}: cell {cell} is not a data patch")
        if qubit in assignment:
            raise MappingError(f"line {line_number}: qubit {qubit} mapped twice")
        if cell in used:
            raise MappingError(f"line {line_number}: cell {cell} already holds qubit {used[cell]}")
        assignment[qubit] = cell
        used[cell] = qubit
    return Mapping(assignment)
