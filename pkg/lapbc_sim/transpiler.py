"""SPC and LAPBC transpilation passes plus the SPC analytic cost model.

Both passes expand every Clifford into quarter rotations and sweep the quarters
they are allowed to move to the end of the program, where they are dropped
(their effect on measurement outcomes is absorbed into the measured axes).

Rather than rewriting the instruction list once per quarter, the sweep keeps a
Pauli frame: the images of X_q and Z_q under conjugation by every quarter
absorbed so far. A later axis L is emitted as frame.image(L), which equals
pushing each absorbed quarter past L one at a time, latest first.

  - SPC absorbs every quarter; output is init / eighth / meas / measm only.
  - LAPBC absorbs weight-1 quarters only; weight-2 quarters stay in place with
    their axes mapped, so every instruction keeps the support of its gate.
"""

from __future__ import annotations

import logging

from .circuit import CLIFFORD_KINDS, Circuit, Gate
from .isa import (
    EIGHTH,
    INIT,
    LAPBC,
    MEAS,
    MEASM,
    SPC,
    IsaInstruction,
    IsaProgram,
    eighth,
    init_instr,
    measurement,
    quarter,
)
from .pauli import (
    QUARTER,
    Rotation,
    SignedPauli,
    clifford_as_quarters,
    commutes,
    hermitian_product,
    iter_bits,
    push_right,
)


logger = logging.getLogger(__name__)


class TranspileError(ValueError):
    """Raised when a circuit cannot be transpiled."""


class PauliFrame:
    """Images of the single-qubit Pauli generators under the absorbed Cliffords."""

    def __init__(self, qubit_count: int) -> None:
        self._x = [SignedPauli.single(q, "X") for q in range(qubit_count)]
        self._z = [SignedPauli.single(q, "Z") for q in range(qubit_count)]
        self._y = [SignedPauli.single(q, "Y") for q in range(qubit_count)]

    def image(self, pauli: SignedPauli) -> SignedPauli:
        """Map a signed Pauli through the frame."""
        result = SignedPauli(sign=pauli.sign)
        for qubit in iter_bits(pauli.xs | pauli.zs):
            x_bit = (pauli.xs >> qubit) & 1
            z_bit = (pauli.zs >> qubit) & 1
            if x_bit and z_bit:
                site = self._y[qubit]
            elif x_bit:
                site = self._x[qubit]
            else:
                site = self._z[qubit]
            result = hermitian_product(result, site)
        return result

    def absorb(self, rotation: Rotation) -> None:
        """Fold a quarter rotation into the frame (it now sits after every later op)."""
        if rotation.kind != QUARTER:
            raise TranspileError("Only quarter rotations can join the frame.")
        axis = rotation.axis
        updates: list[tuple[list[SignedPauli], int, SignedPauli]] = []
        for qubit in iter_bits(axis.xs | axis.zs):
            for table, generator in (
                (self._x, SignedPauli.single(qubit, "X")),
                (self._z, SignedPauli.single(qubit, "Z")),
            ):
                if not commutes(axis, generator):
                    updates.append((table, qubit, self.image(push_right(rotation, generator))))
        for table, qubit, value in updates:
            table[qubit] = value
        for qubit in iter_bits(axis.xs | axis.zs):
            self._y[qubit] = hermitian_product(self._x[qubit], self._z[qubit], extra=1)

    def is_trivial_on(self, qubit: int) -> bool:
        """True when X_q and Z_q map to themselves."""
        return (
            self._x[qubit] == SignedPauli.single(qubit, "X")
            and self._z[qubit] == SignedPauli.single(qubit, "Z")
        )


def gate_rotations(gate: Gate) -> tuple[Rotation, ...]:
    """Rotations a non-measurement gate stands for, in application order."""
    if gate.kind in CLIFFORD_KINDS:
        return clifford_as_quarters(gate)
    if gate.kind == "t":
        return (Rotation("eighth", SignedPauli.single(gate.qubits[0], "Z", sign=-1)),)
    if gate.kind == "tdg":
        return (Rotation("eighth", SignedPauli.single(gate.qubits[0], "Z")),)
    if gate.kind == "pi8":
        return (Rotation("eighth", gate.axis),)
    if gate.kind == "pi4":
        return (Rotation(QUARTER, gate.axis),)
    raise TranspileError(f"Gate {gate.kind!r} has no rotation form.")


def _transpile(circuit: Circuit, flavor: str) -> IsaProgram:
    frame = PauliFrame(circuit.qubit_count)
    out: list[IsaInstruction] = []
    measurement_id = 0
    absorbed = 0
    for gate in circuit.instructions:
        if gate.kind == "rz":
            raise TranspileError(
                f"rz on qubit {gate.qubits[0]} must be synthesized before transpilation."
            )
        if gate.kind == "init":
            qubit = gate.qubits[0]
            if not frame.is_trivial_on(qubit):
                raise TranspileError(f"init on qubit {qubit} follows a Clifford acting on it.")
            out.append(init_instr(qubit))
            continue
        if gate.kind == "measure":
            axis = frame.image(SignedPauli.single(gate.qubits[0], "Z"))
            out.append(measurement(axis, measurement_id))
            measurement_id += 1
            continue
        for rotation in gate_rotations(gate):
            if rotation.kind == QUARTER and (flavor == SPC or rotation.axis.weight == 1):
                frame.absorb(rotation)
                absorbed += 1
                continue
            mapped = frame.image(rotation.axis)
            out.append(quarter(mapped) if rotation.kind == QUARTER else eighth(mapped))

    logger.debug(
        "%s transpile: %d IR instructions -> %d ISA instructions (%d quarters absorbed).",
        flavor,
        len(circuit.instructions),
        len(out),
        absorbed,
    )
    return IsaProgram(flavor, circuit.qubit_count, tuple(out))


def spc_transpile(circuit: Circuit) -> IsaProgram:
    """Commute every Clifford to the end and drop it."""
    return _transpile(circuit, SPC)


def lapbc_transpile(circuit: Circuit) -> IsaProgram:
    """Commute only single-qubit Cliffords to the end; keep two-qubit quarters in place."""
    return _transpile(circuit, LAPBC)


def transpile(circuit: Circuit, flavor: str) -> IsaProgram:
    """Dispatch on flavor name."""
    if flavor == SPC:
        return spc_transpile(circuit)
    if flavor == LAPBC:
        return lapbc_transpile(circuit)
    raise TranspileError(f"Unknown flavor {flavor!r}.")


def spc_cost(program: IsaProgram, d: int) -> int:
    """Sequential SPC cycle count: d per eighth, multi-qubit or Y measurement, plus one init epoch."""
    if program.flavor != SPC:
        raise TranspileError(f"spc_cost expects an SPC program, got {program.flavor}.")
    charged = 0
    has_init = False
    for instr in program.instructions:
        if instr.kind == INIT:
            has_init = True
        elif instr.kind in (EIGHTH, MEASM):
            charged += 1
        elif instr.kind == MEAS and (instr.axis.xs & instr.axis.zs):
            charged += 1
    return d * (charged + (1 if has_init else 0))
