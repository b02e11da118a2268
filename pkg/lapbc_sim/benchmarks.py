"""Benchmark circuit generators: random circuit sampling and Ising time evolution."""

from __future__ import annotations

import numpy as np

from .circuit import Circuit, Gate, cx, cz, h, init, measure, reduce_angle, rz, s
from .circuit import t as t_gate


GAMMA = 1.0 / (4.0 - 4.0 ** (1.0 / 3.0))
_RCS_SINGLES = (s, h, t_gate)


def grid_edges(width: int, height: int) -> list[tuple[int, int]]:
    """Neighbor pairs of a row-major grid: horizontal edges first, then vertical."""
    edges = [
        (row * width + col, row * width + col + 1)
        for row in range(height)
        for col in range(width - 1)
    ]
    edges.extend(
        (row * width + col, (row + 1) * width + col)
        for row in range(height - 1)
        for col in range(width)
    )
    return edges


def _check_grid(width: int, height: int) -> None:
    if width < 1 or height < 1:
        raise ValueError(f"Grid must be at least 1x1, got {width}x{height}.")


def gen_rcs(width: int, height: int, layers: int, seed: int) -> Circuit:
    """Random circuit sampling: CZ on every grid edge, then a random S/H/T per qubit, per layer."""
    _check_grid(width, height)
    if layers < 0:
        raise ValueError("layers must be non-negative.")
    count = width * height
    edges = grid_edges(width, height)
    rng = np.random.default_rng(seed)

    gates: list[Gate] = [init(q) for q in range(count)]
    for _ in range(layers):
        gates.extend(cz(a, b) for a, b in edges)
        picks = rng.integers(0, len(_RCS_SINGLES), size=count)
        gates.extend(_RCS_SINGLES[pick](q) for q, pick in enumerate(picks))
    gates.extend(measure(q) for q in range(count))
    return Circuit(count, tuple(gates))


def trotter_coefficients(steps: int) -> list[tuple[str, float]]:
    """Fourth-order Trotter sequence as ("A"|"B", coefficient of Δ), half-B terms merged."""
    if steps < 1:
        raise ValueError("steps must be at least 1.")
    middle = 1.0 - 4.0 * GAMMA
    a_coeffs = (GAMMA, GAMMA, middle, GAMMA, GAMMA)
    # B halves flanking each second-order block; neighbours in time are summed.
    b_inner = (GAMMA, (GAMMA + middle) / 2.0, (middle + GAMMA) / 2.0, GAMMA)

    sequence: list[tuple[str, float]] = [("B", GAMMA / 2.0)]
    for step in range(steps):
        for index, a_coeff in enumerate(a_coeffs):
            sequence.append(("A", a_coeff))
            if index < len(b_inner):
                sequence.append(("B", b_inner[index]))
        sequence.append(("B", GAMMA if step < steps - 1 else GAMMA / 2.0))
    return sequence


def gen_ising(
    width: int,
    height: int,
    steps: int,
    J: float = 1.0,
    g: float = 1.0,
    t: float = 1.0,
) -> Circuit:
    """Fourth-order Trotterized evolution under H = -J ΣZZ + g ΣX on a grid."""
    _check_grid(width, height)
    count = width * height
    edges = grid_edges(width, height)
    delta = t / steps

    gates: list[Gate] = [init(q) for q in range(count)]
    for term, coeff in trotter_coefficients(steps):
        if term == "A":
            theta = reduce_angle(J * coeff * delta)
            for a, b in edges:
                gates.extend((cx(a, b), rz(b, theta), cx(a, b)))
        else:
            theta = reduce_angle(-g * coeff * delta)
            for q in range(count):
                gates.extend((h(q), rz(q, theta), h(q)))
    gates.extend(measure(q) for q in range(count))
    return Circuit(count, tuple(gates))
