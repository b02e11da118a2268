"""Quantum IR: gates, circuits and the line-oriented text format.

Grammar (UTF-8, one instruction per line, `#` starts a comment):

    qubits N
    init q | measure q | h q | s q | sdg q | t q | tdg q
    cx c t | cz a b | rz q <angle>
    pi8 q <signed axis> | pi4 q <signed axis>     (synthesis placeholders)

`rz q θ` denotes exp(iθZ) with θ in [0, 2π). The placeholders carry a signed
single-qubit axis such as `+X` or `-Y` and stand for exp(iπ/8·P) / exp(iπ/4·P).
"""

from __future__ import annotations

from dataclasses import dataclass, field
import math
from typing import Iterable

from .pauli import SignedPauli


TAU = 2.0 * math.pi

SINGLE_QUBIT_CLIFFORDS = ("h", "s", "sdg")
TWO_QUBIT_CLIFFORDS = ("cx", "cz")
CLIFFORD_KINDS = SINGLE_QUBIT_CLIFFORDS + TWO_QUBIT_CLIFFORDS
T_KINDS = ("t", "tdg")
PLACEHOLDER_KINDS = ("pi8", "pi4")
GATE_KINDS = ("init", "measure") + CLIFFORD_KINDS + T_KINDS + ("rz",) + PLACEHOLDER_KINDS
_ARITY = {kind: 2 if kind in TWO_QUBIT_CLIFFORDS else 1 for kind in GATE_KINDS}


class CircuitError(ValueError):
    """Raised for malformed IR text or circuits violating the IR invariants."""

    def __init__(self, message: str, line: int | None = None) -> None:
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


def reduce_angle(theta: float) -> float:
    """Reduce an angle into [0, 2π)."""
    reduced = math.fmod(theta, TAU)
    if reduced < 0:
        reduced += TAU
    if reduced >= TAU:
        reduced = 0.0
    return reduced


@dataclass(frozen=True)
class Gate:
    kind: str
    qubits: tuple[int, ...]
    angle: float | None = None
    axis: SignedPauli | None = None

    def __post_init__(self) -> None:
        """Validate arity and payload."""
        if self.kind not in GATE_KINDS:
            raise CircuitError(f"Unknown gate kind {self.kind!r}.")
        if len(self.qubits) != _ARITY[self.kind]:
            raise CircuitError(f"Gate {self.kind} expects {_ARITY[self.kind]} qubit(s).")
        if len(set(self.qubits)) != len(self.qubits):
            raise CircuitError(f"Gate {self.kind} needs distinct qubits, got {self.qubits}.")
        if self.kind == "rz":
            if self.angle is None or not math.isfinite(self.angle):
                raise CircuitError("rz requires a finite angle.")
            if not 0.0 <= self.angle < TAU:
                raise CircuitError(f"rz angle {self.angle!r} outside [0, 2π).")
        elif self.angle is not None:
            raise CircuitError(f"Gate {self.kind} takes no angle.")
        if self.kind in PLACEHOLDER_KINDS:
            if self.axis is None or self.axis.support() != frozenset(self.qubits):
                raise CircuitError(f"{self.kind} requires a signed axis on qubit {self.qubits[0]}.")
        elif self.axis is not None:
            raise CircuitError(f"Gate {self.kind} takes no axis.")

    def to_text(self) -> str:
        """Render one IR line."""
        operands = " ".join(str(q) for q in self.qubits)
        if self.kind == "rz":
            return f"rz {operands} {self.angle!r}"
        if self.kind in PLACEHOLDER_KINDS:
            axis = str(self.axis)
            return f"{self.kind} {operands} {axis[0]}{axis[1]}"
        return f"{self.kind} {operands}"


def init(qubit: int) -> Gate:
    return Gate("init", (qubit,))


def measure(qubit: int) -> Gate:
    return Gate("measure", (qubit,))


def h(qubit: int) -> Gate:
    return Gate("h", (qubit,))


def s(qubit: int) -> Gate:
    return Gate("s", (qubit,))


def sdg(qubit: int) -> Gate:
    return Gate("sdg", (qubit,))


def t(qubit: int) -> Gate:
    return Gate("t", (qubit,))


def tdg(qubit: int) -> Gate:
    return Gate("tdg", (qubit,))


def cx(control: int, target: int) -> Gate:
    return Gate("cx", (control, target))


def cz(a: int, b: int) -> Gate:
    return Gate("cz", (a, b))


def rz(qubit: int, theta: float) -> Gate:
    return Gate("rz", (qubit,), angle=theta)


def placeholder(kind: str, qubit: int, axis: str, sign: int = 1) -> Gate:
    """Synthesis placeholder `pi8`/`pi4` on one qubit."""
    return Gate(kind, (qubit,), axis=SignedPauli.single(qubit, axis, sign=sign))


@dataclass(frozen=True)
class Circuit:
    qubit_count: int
    instructions: tuple[Gate, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        """Coerce the instruction list and check the IR invariants."""
        object.__setattr__(self, "instructions", tuple(self.instructions))
        self.validate()

    def validate(self) -> None:
        """Check qubit ranges, init-first and measure-terminal rules."""
        if self.qubit_count < 1:
            raise CircuitError("Circuit needs at least one qubit.")
        validate_gates(self.qubit_count, self.instructions)

    def count(self, *kinds: str) -> int:
        """Number of instructions of the given kinds."""
        return sum(1 for gate in self.instructions if gate.kind in kinds)

    def to_text(self) -> str:
        """Serialize to the IR text format."""
        lines = [f"qubits {self.qubit_count}"]
        lines.extend(gate.to_text() for gate in self.instructions)
        return "\n".join(lines) + "\n"


def validate_gates(
    qubit_count: int,
    gates: Iterable[Gate],
    lines: Iterable[int] | None = None,
) -> None:
    """Check a gate sequence against the IR invariants."""
    touched: set[int] = set()
    measured: set[int] = set()
    line_numbers = iter(lines) if lines is not None else None
    for gate in gates:
        line = next(line_numbers) if line_numbers is not None else None
        for qubit in gate.qubits:
            if not 0 <= qubit < qubit_count:
                raise CircuitError(
                    f"qubit {qubit} out of range for {qubit_count}-qubit register", line
                )
            if qubit in measured:
                raise CircuitError(f"qubit {qubit} used after its measurement", line)
            if gate.kind == "init" and qubit in touched:
                raise CircuitError(f"init on qubit {qubit} must precede all other operations", line)
        touched.update(gate.qubits)
        if gate.kind == "measure":
            measured.update(gate.qubits)


def parse_ir(text: str) -> Circuit:
    """Parse IR text into a validated Circuit."""
    qubit_count: int | None = None
    gates: list[Gate] = []
    gate_lines: list[int] = []
    for line_number, raw_line in enumerate(text.splitlines(), start=1):
        content = raw_line.split("#", 1)[0].strip()
        if not content:
            continue
        tokens = content.split()
        opcode = tokens[0].lower()
        if opcode == "qubits":
            if qubit_count is not None:
                raise CircuitError("duplicate 'qubits' declaration", line_number)
            if len(tokens) != 2:
                raise CircuitError("expected 'qubits N'", line_number)
            qubit_count = _parse_int(tokens[1], line_number)
            if qubit_count < 1:
                raise CircuitError("qubit count must be positive", line_number)
            continue
        if qubit_count is None:
            raise CircuitError("'qubits N' must come before any instruction", line_number)
        gates.append(_parse_gate(opcode, tokens[1:], line_number))
        gate_lines.append(line_number)

    if qubit_count is None:
        raise CircuitError("missing 'qubits N' declaration")
    validate_gates(qubit_count, gates, gate_lines)
    return Circuit(qubit_count, tuple(gates))


def serialize(circuit: Circuit) -> str:
    """Serialize a Circuit to IR text."""
    return circuit.to_text()


def _parse_gate(opcode: str, operands: list[str], line: int) -> Gate:
    """Parse one instruction line."""
    if opcode not in GATE_KINDS:
        raise CircuitError(f"unknown instruction {opcode!r}", line)
    arity = _ARITY[opcode]
    extra = 1 if opcode in ("rz",) + PLACEHOLDER_KINDS else 0
    if len(operands) != arity + extra:
        raise CircuitError(f"'{opcode}' expects {arity + extra} operand(s)", line)
    qubits = tuple(_parse_int(token, line) for token in operands[:arity])
    try:
        if opcode == "rz":
            return Gate("rz", qubits, angle=_parse_float(operands[-1], line))
        if opcode in PLACEHOLDER_KINDS:
            token = operands[-1]
            if len(token) != 2 or token[0] not in "+-" or token[1] not in "XYZ":
                raise CircuitError(f"bad placeholder axis {token!r}", line)
            return placeholder(opcode, qubits[0], token[1], sign=-1 if token[0] == "-" else 1)
        return Gate(opcode, qubits)
    except CircuitError as exc:
        if exc.line is None:
            raise CircuitError(str(exc), line) from exc
        raise


def _parse_int(token: str, line: int) -> int:
    try:
        value = int(token)
    except ValueError as exc:
        raise CircuitError(f"expected an integer, got {token!r}", line) from exc
    if value < 0:
        raise CircuitError(f"expected a non-negative integer, got {token!r}", line)
    return value


def _parse_float(token: str, line: int) -> float:
    try:
        return float(token)
    except ValueError as exc:
        raise CircuitError(f"expected an angle, got {token!r}", line) from exc
