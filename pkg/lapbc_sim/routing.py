"""Patch occupancy, lattice-surgery routing and distillation-area allocation.

Routing questions are asked against a predicate `is_free(cell)` that the
scheduler builds from an Occupancy and a candidate cycle window, so the same
search code serves every phase of an instruction.
"""

from __future__ import annotations

from bisect import bisect_left, bisect_right, insort
from collections import deque
from dataclasses import dataclass
from functools import lru_cache
import heapq
from typing import Callable, Iterable, Iterator, Sequence

import networkx as nx

from .layout import Cell, Layout


FreePredicate = Callable[[Cell], bool]
Terminal = tuple[Cell, str]


class Occupancy:
    """Reserved [start, end) intervals per patch, plus every reservation end time."""

    def __init__(self) -> None:
        self._starts: dict[Cell, list[int]] = {}
        self._ends: dict[Cell, list[int]] = {}
        self._all_ends: list[int] = []

    def is_free(self, cell: Cell, start: int, end: int) -> bool:
        """True when no reservation on `cell` overlaps [start, end)."""
        if end <= start:
            return True
        starts = self._starts.get(cell)
        if not starts:
            return True
        index = bisect_right(starts, start)
        if index > 0 and self._ends[cell][index - 1] > start:
            return False
        return index >= len(starts) or starts[index] >= end

    def reserve(self, cell: Cell, start: int, end: int) -> None:
        """Reserve [start, end) on `cell`; the window must be free."""
        if end <= start:
            return
        if not self.is_free(cell, start, end):
            raise ValueError(f"Patch {cell} already reserved within [{start}, {end}).")
        starts = self._starts.setdefault(cell, [])
        ends = self._ends.setdefault(cell, [])
        index = bisect_left(starts, start)
        starts.insert(index, start)
        ends.insert(index, end)
        insort(self._all_ends, end)

    def next_end_after(self, cycle: int) -> int | None:
        """Smallest reservation end strictly after `cycle`."""
        index = bisect_right(self._all_ends, cycle)
        return self._all_ends[index] if index < len(self._all_ends) else None

    @property
    def horizon(self) -> int:
        """Latest reservation end (0 when empty)."""
        return self._all_ends[-1] if self._all_ends else 0


def required_sides(axis: str) -> tuple[str, ...]:
    """Edge kinds a terminal must touch: Z -> N/S, X -> E/W, Y -> both."""
    if axis == "Y":
        return ("Z", "X")
    if axis in ("Z", "X"):
        return (axis,)
    raise ValueError(f"Unknown terminal axis {axis!r}.")


def _requirements(
    layout: Layout, is_free: FreePredicate, terminals: Sequence[Terminal]
) -> list[frozenset[Cell]]:
    requirements = []
    for cell, axis in terminals:
        for side in required_sides(axis):
            requirements.append(
                frozenset(c for c in layout.edge_neighbors(cell, side) if is_free(c))
            )
    return requirements


def _directly_adjacent(terminals: Sequence[Terminal]) -> bool:
    """Two data patches sharing an edge that exposes the same axis on both."""
    if len(terminals) != 2:
        return False
    (first, axis_a), (second, axis_b) = terminals
    if axis_a != axis_b:
        return False
    dr = abs(first[0] - second[0])
    dc = abs(first[1] - second[1])
    if axis_a == "Z":
        return dr == 1 and dc == 0
    if axis_a == "X":
        return dr == 0 and dc == 1
    return False


def grow_region(
    layout: Layout,
    is_free: FreePredicate,
    seed: set[Cell],
    pending: list[frozenset[Cell]],
) -> set[Cell] | None:
    """Connect `seed` to one cell of every pending set by repeated multi-source BFS."""
    region = set(seed)
    pending = [req for req in pending if not (req & region)]
    if not region:
        if not pending:
            return region
        first = pending.pop(0)
        if not first:
            return None
        sources = sorted(first)
    else:
        sources = sorted(region)

    while pending:
        if any(not req for req in pending):
            return None
        parent: dict[Cell, Cell | None] = {cell: None for cell in sources}
        queue = deque(sources)
        hit = None
        while queue:
            cell = queue.popleft()
            if any(cell in req for req in pending):
                hit = cell
                break
            for other in layout.neighbors(cell):
                if other not in parent and layout.is_routing(other) and is_free(other):
                    parent[other] = cell
                    queue.append(other)
        if hit is None:
            return None
        cell = hit
        while cell is not None:
            region.add(cell)
            cell = parent[cell]
        pending = [req for req in pending if not (req & region)]
        sources = sorted(region)

    if not region and sources:
        region.add(sources[0])
    return region


def _hops(
    layout: Layout, is_free: FreePredicate, sources: Iterable[Cell], limit: int
) -> tuple[dict[Cell, int], dict[Cell, Cell | None]]:
    """Hop counts from `sources` over free routing cells, with predecessors, up to `limit`."""
    dist: dict[Cell, int] = {}
    parent: dict[Cell, Cell | None] = {}
    queue: deque[Cell] = deque()
    for cell in sorted(sources):
        dist[cell] = 0
        parent[cell] = None
        queue.append(cell)
    while queue:
        cell = queue.popleft()
        if dist[cell] >= limit:
            continue
        for other in layout.neighbors(cell):
            if other not in dist and layout.is_routing(other) and is_free(other):
                dist[other] = dist[cell] + 1
                parent[other] = cell
                queue.append(other)
    return dist, parent


def _relax(
    layout: Layout, seeds: dict[Cell, int], allowed: set[Cell]
) -> tuple[dict[Cell, int], dict[Cell, Cell | None]]:
    """Unit-step shortest paths inside `allowed`, each seed starting at its own cost."""
    best = dict(seeds)
    parent: dict[Cell, Cell | None] = {cell: None for cell in seeds}
    heap = [(cost, cell) for cell, cost in seeds.items()]
    heapq.heapify(heap)
    while heap:
        cost, cell = heapq.heappop(heap)
        if cost > best[cell]:
            continue
        for other in layout.neighbors(cell):
            if other in allowed and cost + 1 < best.get(other, cost + 2):
                best[other] = cost + 1
                parent[other] = cell
                heapq.heappush(heap, (cost + 1, other))
    return best, parent


def _trace(parent: dict[Cell, Cell | None], cell: Cell) -> list[Cell]:
    path = [cell]
    while parent[path[-1]] is not None:
        path.append(parent[path[-1]])
    return path


# Largest group count the exact search handles.
_EXACT_GROUPS = 4
# Ways to split four groups into two pairs, one pair per branch cell.
_PAIRINGS = (((0, 1), (2, 3)), ((0, 2), (1, 3)), ((0, 3), (1, 2)))


def steiner_region(
    layout: Layout,
    is_free: FreePredicate,
    groups: Sequence[frozenset[Cell]],
    limit: int,
) -> frozenset[Cell] | None:
    """Fewest free routing cells forming a connected set that meets every group.

    Exact for up to four groups: a minimal tree over four groups branches at
    one cell or at two cells joined by a path. Cells more than `limit` hops
    from some group are never used, so `limit` should be an upper bound on the
    answer's size minus one.
    """
    if not groups or len(groups) > _EXACT_GROUPS:
        raise ValueError("steiner_region handles one to four groups.")
    searches = [_hops(layout, is_free, group, limit) for group in groups]
    reachable = set(searches[0][0])
    for dist, _ in searches[1:]:
        reachable &= set(dist)
    if not reachable:
        return None
    nodes = sorted(reachable)

    if len(groups) < _EXACT_GROUPS:
        center = min(nodes, key=lambda cell: (sum(dist[cell] for dist, _ in searches), cell))
        region: set[Cell] = set()
        for _, parent in searches:
            region.update(_trace(parent, center))
        return frozenset(region)

    best: tuple[int, int, Cell] | None = None
    links: list[dict[Cell, Cell | None]] = []
    for index, ((a, b), (c, e)) in enumerate(_PAIRINGS):
        seeds = {cell: searches[c][0][cell] + searches[e][0][cell] for cell in nodes}
        reach, link = _relax(layout, seeds, reachable)
        links.append(link)
        for cell in nodes:
            key = (searches[a][0][cell] + searches[b][0][cell] + reach[cell], index, cell)
            if best is None or key < best:
                best = key
    assert best is not None
    _, index, near = best
    (a, b), (c, e) = _PAIRINGS[index]
    path = _trace(links[index], near)
    far = path[-1]
    region = set(path)
    for group, anchor in ((a, near), (b, near), (c, far), (e, far)):
        region.update(_trace(searches[group][1], anchor))
    return frozenset(region)


def route_surgery(
    layout: Layout, is_free: FreePredicate, terminals: Sequence[Terminal]
) -> frozenset[Cell] | None:
    """Minimal connected free routing region touching each terminal's required edges.

    Returns an empty region for edge-adjacent data patches whose shared edge
    matches both axes, and None when no region exists under `is_free`. Exact
    whenever the terminals need at most four edges between them (any pair of
    terminals); larger terminal sets get the greedy region.
    """
    if _directly_adjacent(terminals):
        return frozenset()
    requirements = _requirements(layout, is_free, terminals)
    if any(not req for req in requirements):
        return None
    groups = list(dict.fromkeys(requirements))
    region = grow_region(layout, is_free, set(), list(groups))
    if region is None:
        return None
    # Two groups: the greedy region is a shortest path, already minimal.
    if 3 <= len(groups) <= _EXACT_GROUPS and len(region) > 1:
        exact = steiner_region(layout, is_free, groups, len(region) - 1)
        if exact is not None and len(exact) < len(region):
            return exact
    return frozenset(region)


def connected_sets(
    root: Cell, size: int, allowed: Callable[[Cell], bool], layout: Layout
) -> Iterator[frozenset[Cell]]:
    """Every connected set of `size` allowed cells containing `root`, each once."""
    if size < 1:
        return

    def neighbors(cell: Cell) -> list[Cell]:
        return [other for other in layout.neighbors(cell) if allowed(other)]

    def grow(members: frozenset[Cell], frontier: list[Cell], banned: frozenset[Cell]):
        if len(members) == size:
            yield members
            return
        for index, cell in enumerate(frontier):
            skipped = banned | frozenset(frontier[:index])
            extended = set(frontier[index + 1:])
            extended.update(neighbors(cell))
            extended -= members
            extended -= skipped
            extended.discard(cell)
            yield from grow(members | {cell}, sorted(extended), skipped | {cell})

    start = frozenset((root,))
    yield from grow(start, sorted(neighbors(root)), start)


def _normalize(cells: frozenset[Cell]) -> frozenset[Cell]:
    top = min(row for row, _ in cells)
    left = min(col for _, col in cells)
    return frozenset((row - top, col - left) for row, col in cells)


@lru_cache(maxsize=4096)
def _shape_diameter(shape: frozenset[Cell]) -> int:
    graph = nx.Graph()
    graph.add_nodes_from(shape)
    for row, col in shape:
        for other in ((row + 1, col), (row, col + 1)):
            if other in shape:
                graph.add_edge((row, col), other)
    return nx.diameter(graph)


def set_diameter(cells: frozenset[Cell]) -> int:
    """Graph diameter of a connected cell set under 4-adjacency."""
    return _shape_diameter(_normalize(cells))


@dataclass(frozen=True)
class DistillAllocation:
    cells: frozenset[Cell]
    magic: Cell
    region: frozenset[Cell]


def allocate_distillation(
    layout: Layout,
    target: Cell,
    axis: str,
    size: int,
    *,
    distill_free: FreePredicate,
    magic_free: FreePredicate,
    surgery_free: FreePredicate,
    hold: bool = False,
) -> DistillAllocation | None:
    """Pick D connected free routing cells for distillation next to `target`.

    The magic cell touches the target edge required by `axis` (any edge for Y,
    which then needs a surgery region reaching an edge of the other kind).
    Candidates are ranked by set diameter, then total Manhattan distance to the
    target, then lexicographically.
    """
    if size < 1:
        raise ValueError("Distillation area needs at least one patch.")
    sides = ("Z", "X") if axis == "Y" else (axis,)
    candidates = sorted(
        {cell for side in sides for cell in layout.edge_neighbors(target, side)}
    )

    best: tuple | None = None
    best_allocation: DistillAllocation | None = None
    for magic in candidates:
        if not magic_free(magic):
            continue
        region: frozenset[Cell] = frozenset()
        if axis == "Y":
            side = "Z" if magic in layout.edge_neighbors(target, "Z") else "X"
            other = "X" if side == "Z" else "Z"
            requirement = frozenset(
                cell for cell in layout.edge_neighbors(target, other) if surgery_free(cell)
            )
            grown = grow_region(layout, surgery_free, {magic}, [requirement])
            if grown is None:
                continue
            region = frozenset(grown - {magic})

        def allowed(cell: Cell, region: frozenset[Cell] = region) -> bool:
            if not layout.is_routing(cell) or not distill_free(cell):
                return False
            return not (hold and cell in region)

        if not allowed(magic):
            continue
        for cells in connected_sets(magic, size, allowed, layout):
            manhattan = sum(abs(r - target[0]) + abs(c - target[1]) for r, c in cells)
            key = (set_diameter(cells), manhattan, tuple(sorted(cells)), magic)
            if best is None or key < best:
                best = key
                best_allocation = DistillAllocation(cells=cells, magic=magic, region=region)
    return best_allocation
