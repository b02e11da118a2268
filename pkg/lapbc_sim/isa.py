"""Pauli-based ISA programs and their text interchange format.

    flavor lapbc
    qubits 4
    init 0
    quarter +X0X1
    eighth -Y1
    meas +Z1 @0
    measm +Z0Z1 @1

`@k` is the index of the IR measurement a measurement line descends from.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

from .pauli import PauliError, SignedPauli


SPC = "spc"
LAPBC = "lapbc"
FLAVORS = (SPC, LAPBC)

INIT = "init"
MEAS = "meas"
MEASM = "measm"
QUARTER = "quarter"
EIGHTH = "eighth"
ISA_KINDS = (INIT, MEAS, MEASM, QUARTER, EIGHTH)


class IsaError(ValueError):
    """Raised for malformed ISA programs or text."""


@dataclass(frozen=True)
class IsaInstruction:
    kind: str
    axis: SignedPauli | None = None
    qubit: int | None = None
    measurement_id: int | None = None

    def __post_init__(self) -> None:
        """Validate the variant payload."""
        if self.kind not in ISA_KINDS:
            raise IsaError(f"Unknown ISA instruction kind {self.kind!r}.")
        if self.kind == INIT:
            if self.qubit is None or self.axis is not None:
                raise IsaError("init carries a qubit and no axis.")
            return
        if self.axis is None or self.axis.is_identity:
            raise IsaError(f"{self.kind} needs a non-identity axis.")
        if self.kind == MEAS and self.axis.weight != 1:
            raise IsaError(f"meas axis must have weight 1, got {self.axis}.")
        if self.kind not in (MEAS, MEASM) and self.measurement_id is not None:
            raise IsaError(f"{self.kind} carries no measurement id.")

    @property
    def is_measurement(self) -> bool:
        return self.kind in (MEAS, MEASM)

    def support(self) -> frozenset[int]:
        """Qubits this instruction acts on."""
        if self.kind == INIT:
            return frozenset((self.qubit,))
        return self.axis.support()

    def to_text(self) -> str:
        """Render one ISA line."""
        if self.kind == INIT:
            return f"init {self.qubit}"
        line = f"{self.kind} {self.axis}"
        if self.measurement_id is not None:
            line += f" @{self.measurement_id}"
        return line

    @staticmethod
    def parse(line: str) -> "IsaInstruction":
        """Parse one ISA line."""
        tokens = line.split()
        if not tokens or tokens[0] not in ISA_KINDS:
            raise IsaError(f"Unknown ISA instruction: {line!r}")
        kind = tokens[0]
        try:
            if kind == INIT:
                if len(tokens) != 2:
                    raise IsaError(f"Expected 'init q': {line!r}")
                return IsaInstruction(INIT, qubit=int(tokens[1]))
            measurement_id = None
            rest = tokens[1:]
            if rest and rest[-1].startswith("@"):
                measurement_id = int(rest[-1][1:])
                rest = rest[:-1]
            if len(rest) != 1:
                raise IsaError(f"Expected '{kind} <axis>': {line!r}")
            return IsaInstruction(kind, axis=SignedPauli.parse(rest[0]), measurement_id=measurement_id)
        except (ValueError, PauliError) as exc:
            if isinstance(exc, IsaError):
                raise
            raise IsaError(f"Malformed ISA line {line!r}: {exc}") from exc


def init_instr(qubit: int) -> IsaInstruction:
    return IsaInstruction(INIT, qubit=qubit)


def quarter(axis: SignedPauli) -> IsaInstruction:
    return IsaInstruction(QUARTER, axis=axis)


def eighth(axis: SignedPauli) -> IsaInstruction:
    return IsaInstruction(EIGHTH, axis=axis)


def measurement(axis: SignedPauli, measurement_id: int | None = None) -> IsaInstruction:
    """MeasureSingle for weight 1, MeasureMulti otherwise."""
    kind = MEAS if axis.weight == 1 else MEASM
    return IsaInstruction(kind, axis=axis, measurement_id=measurement_id)


@dataclass(frozen=True)
class IsaProgram:
    flavor: str
    qubit_count: int
    instructions: tuple[IsaInstruction, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        """Check flavor invariants and qubit ranges."""
        object.__setattr__(self, "instructions", tuple(self.instructions))
        if self.flavor not in FLAVORS:
            raise IsaError(f"Unknown flavor {self.flavor!r}.")
        if self.qubit_count < 1:
            raise IsaError("ISA program needs at least one qubit.")
        for index, instr in enumerate(self.instructions):
            if any(q >= self.qubit_count for q in instr.support()):
                raise IsaError(f"Instruction {index} ({instr.to_text()}) exceeds the register.")
            if self.flavor == SPC and instr.kind == QUARTER:
                raise IsaError(f"SPC programs contain no quarter rotations (instruction {index}).")
            if self.flavor == LAPBC:
                _check_lapbc(index, instr)

    def count(self, *kinds: str) -> int:
        return sum(1 for instr in self.instructions if instr.kind in kinds)

    def to_text(self) -> str:
        """Serialize to ISA text."""
        lines = [f"flavor {self.flavor}", f"qubits {self.qubit_count}"]
        lines.extend(instr.to_text() for instr in self.instructions)
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict[str, Any]:
        return {
            "flavor": self.flavor,
            "qubit_count": self.qubit_count,
            "instructions": [instr.to_text() for instr in self.instructions],
        }


def _check_lapbc(index: int, instr: IsaInstruction) -> None:
    if instr.kind == EIGHTH and instr.axis.weight != 1:
        raise IsaError(f"LAPBC eighth rotations have weight 1 (instruction {index}).")
    if instr.kind == QUARTER and instr.axis.weight != 2:
        raise IsaError(f"LAPBC quarter rotations have weight 2 (instruction {index}).")
    if instr.kind == MEASM:
        raise IsaError(f"LAPBC circuit measurements have weight 1 (instruction {index}).")


def parse_isa(text: str) -> IsaProgram:
    """Parse ISA text into a validated program."""
    flavor: str | None = None
    qubit_count: int | None = None
    instructions: list[IsaInstruction] = []
    for line_number, raw_line in enumerate(text.splitlines(), start=1):
        content = raw_line.split("#", 1)[0].strip()
        if not content:
            continue
        tokens = content.split()
        if tokens[0] == "flavor" and len(tokens) == 2:
            flavor = tokens[1].lower()
            continue
        if tokens[0] == "qubits" and len(tokens) == 2:
            try:
                qubit_count = int(tokens[1])
            except ValueError as exc:
                raise IsaError(f"line {line_number}: bad qubit count {tokens[1]!r}") from exc
            continue
        try:
            instructions.append(IsaInstruction.parse(content))
        except IsaError as exc:
            raise IsaError(f"line {line_number}: {exc}") from exc
    if flavor is None or qubit_count is None:
        raise IsaError("ISA text needs 'flavor' and 'qubits' headers.")
    return IsaProgram(flavor, qubit_count, tuple(instructions))
