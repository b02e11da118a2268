"""Cost emulation of arbitrary-angle Z rotation synthesis.

Each `rz` becomes a tail of l random single-qubit π/8 placeholders followed by
two random π/4 placeholders. Only the length statistics matter downstream:
l is drawn from Normal(1.5·log2(1/rho), length_stddev), rounded and clamped at 0.
The placeholders do not approximate the angle.
"""

from __future__ import annotations

from dataclasses import dataclass
import logging
import math

import numpy as np

from .circuit import Circuit, Gate, placeholder


logger = logging.getLogger(__name__)

ROUNDING_MODES = ("round", "floor")
_SIGNED_AXES = tuple((axis, sign) for axis in ("X", "Y", "Z") for sign in (1, -1))


@dataclass(frozen=True)
class SynthesisParams:
    rho: float = 1e-7
    length_stddev: float = 2.0
    seed: int = 0
    rounding: str = "round"

    def __post_init__(self) -> None:
        """Validate ranges."""
        if not 0.0 < self.rho < 1.0:
            raise ValueError(f"rho must lie in (0, 1), got {self.rho}.")
        if self.length_stddev < 0:
            raise ValueError("length_stddev must be non-negative.")
        if self.rounding not in ROUNDING_MODES:
            raise ValueError(f"rounding must be one of {ROUNDING_MODES}, got {self.rounding!r}.")

    @property
    def delta(self) -> float:
        """Bits of precision, log2(1/rho)."""
        return math.log2(1.0 / self.rho)

    @property
    def mean_length(self) -> float:
        """Expected number of π/8 rotations per synthesized rz."""
        return 1.5 * self.delta


def sample_length(params: SynthesisParams, rng: np.random.Generator) -> int:
    """Draw one tail length l."""
    raw = rng.normal(params.mean_length, params.length_stddev)
    if params.rounding == "floor":
        length = math.floor(raw)
    else:
        length = math.floor(raw + 0.5)
    if length < 0:
        logger.warning("Synthesized length %.3f clamped to 0.", raw)
        return 0
    return int(length)


def synthesize(circuit: Circuit, params: SynthesisParams) -> Circuit:
    """Replace every rz with its emulated Clifford+T tail."""
    if not any(gate.kind == "rz" for gate in circuit.instructions):
        return circuit

    rng = np.random.default_rng(params.seed)
    gates: list[Gate] = []
    rotations = 0
    for gate in circuit.instructions:
        if gate.kind != "rz":
            gates.append(gate)
            continue
        rotations += 1
        qubit = gate.qubits[0]
        length = sample_length(params, rng)
        picks = rng.integers(0, len(_SIGNED_AXES), size=length + 2)
        for index, pick in enumerate(picks):
            axis, sign = _SIGNED_AXES[pick]
            kind = "pi8" if index < length else "pi4"
            gates.append(placeholder(kind, qubit, axis, sign=sign))

    logger.debug("Synthesized %d rz rotations into %d instructions.", rotations, len(gates))
    return Circuit(circuit.qubit_count, tuple(gates))
