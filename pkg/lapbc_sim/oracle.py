"""Dense statevector reference for small circuits and ISA programs.

Amplitudes are indexed little-endian: bit q of a basis index is qubit q.
Gates use their textbook matrices (never the quarter-rotation decompositions),
so comparing a circuit against its transpiled program is an independent check.
Outcome distributions are exact: every measurement branches both ways.
"""

from __future__ import annotations

from dataclasses import dataclass
import math
from typing import Iterable, Sequence, Union

import numpy as np

from .circuit import Circuit, Gate, cx, cz, h, init, measure, s, sdg, t, tdg
from .isa import INIT, IsaProgram
from .pauli import EIGHTH, QUARTER, Rotation, SignedPauli, iter_bits


MAX_QUBITS = 10
MAX_MEASUREMENTS = 12
_PRUNE = 1e-15

_SQRT_HALF = 1.0 / math.sqrt(2.0)
_MATRICES = {
    "h": np.array([[1, 1], [1, -1]], dtype=complex) * _SQRT_HALF,
    "s": np.diag([1, 1j]).astype(complex),
    "sdg": np.diag([1, -1j]).astype(complex),
    "t": np.diag([1, np.exp(1j * math.pi / 4)]).astype(complex),
    "tdg": np.diag([1, np.exp(-1j * math.pi / 4)]).astype(complex),
}

Operation = Union[Gate, Rotation]
OutcomeDistribution = dict[str, float]


class OracleLimitError(ValueError):
    """Raised when a program exceeds the dense simulator's size limits."""


class ProvenanceError(ValueError):
    """Raised when ISA measurements cannot be aligned with circuit measurements."""


def _check_qubits(n: int) -> None:
    if not 1 <= n <= MAX_QUBITS:
        raise OracleLimitError(f"Oracle supports 1..{MAX_QUBITS} qubits, got {n}.")


def _apply_single(state: np.ndarray, matrix: np.ndarray, qubit: int, n: int) -> np.ndarray:
    view = state.reshape(2 ** (n - 1 - qubit), 2, 2**qubit, -1)
    return np.einsum("ab,ibjk->iajk", matrix, view).reshape(state.shape)


def _bit_values(n: int, qubit: int) -> np.ndarray:
    return (np.arange(2**n) >> qubit) & 1


def apply_pauli(state: np.ndarray, pauli: SignedPauli, n: int) -> np.ndarray:
    """Return P·state for a signed Pauli in Hermitian form."""
    indices = np.arange(2**n)
    parity = np.zeros(2**n, dtype=np.int64)
    for qubit in iter_bits(pauli.zs):
        parity ^= (indices >> qubit) & 1
    y_count = (pauli.xs & pauli.zs).bit_count()
    factor = pauli.sign * (1j**y_count) * np.where(parity, -1.0, 1.0)
    out = np.empty_like(state)
    out[indices ^ pauli.xs] = factor[:, None] * state
    return out


def apply_rotation(state: np.ndarray, rotation: Rotation, n: int) -> np.ndarray:
    """exp(iθP)·state = cos θ·state + i sin θ·P·state."""
    theta = math.pi / 4 if rotation.kind == QUARTER else math.pi / 8
    return math.cos(theta) * state + 1j * math.sin(theta) * apply_pauli(state, rotation.axis, n)


def apply_gate(state: np.ndarray, gate: Gate, n: int) -> np.ndarray:
    """Apply a unitary IR gate."""
    if gate.kind in _MATRICES:
        return _apply_single(state, _MATRICES[gate.kind], gate.qubits[0], n)
    if gate.kind == "rz":
        theta = gate.angle
        matrix = np.diag([np.exp(1j * theta), np.exp(-1j * theta)])
        return _apply_single(state, matrix, gate.qubits[0], n)
    if gate.kind == "cz":
        a, b = gate.qubits
        both = _bit_values(n, a) & _bit_values(n, b)
        return np.where(both[:, None] == 1, -state, state)
    if gate.kind == "cx":
        control, target = gate.qubits
        indices = np.arange(2**n)
        source = np.where(_bit_values(n, control) == 1, indices ^ (1 << target), indices)
        return state[source]
    if gate.kind in ("pi8", "pi4"):
        kind = EIGHTH if gate.kind == "pi8" else QUARTER
        return apply_rotation(state, Rotation(kind, gate.axis), n)
    raise OracleLimitError(f"Gate {gate.kind!r} is not unitary.")


def unitary_of(ops: Sequence[Operation], n: int) -> np.ndarray:
    """Dense matrix of the operations applied in order."""
    _check_qubits(n)
    matrix = np.eye(2**n, dtype=complex)
    for op in ops:
        if isinstance(op, Rotation):
            matrix = apply_rotation(matrix, op, n)
        else:
            matrix = apply_gate(matrix, op, n)
    return matrix


@dataclass(frozen=True)
class _Step:
    kind: str  # "init" | "measure" | "unitary"
    qubit: int | None = None
    axis: SignedPauli | None = None
    slot: int | None = None
    op: Operation | None = None


def _circuit_steps(circuit: Circuit) -> list[_Step]:
    steps: list[_Step] = []
    slot = 0
    for gate in circuit.instructions:
        if gate.kind == "init":
            steps.append(_Step("init", qubit=gate.qubits[0]))
        elif gate.kind == "measure":
            steps.append(_Step("measure", axis=SignedPauli.single(gate.qubits[0], "Z"), slot=slot))
            slot += 1
        else:
            steps.append(_Step("unitary", op=gate))
    return steps


def _program_steps(program: IsaProgram) -> list[_Step]:
    steps: list[_Step] = []
    slot = 0
    for instr in program.instructions:
        if instr.kind == INIT:
            steps.append(_Step("init", qubit=instr.qubit))
        elif instr.is_measurement:
            index = instr.measurement_id if instr.measurement_id is not None else slot
            steps.append(_Step("measure", axis=instr.axis, slot=index))
            slot += 1
        else:
            steps.append(_Step("unitary", op=Rotation(instr.kind, instr.axis)))
    return steps


def distribution(program: Circuit | IsaProgram, n: int | None = None) -> OutcomeDistribution:
    """Exact outcome distribution keyed by bitstrings in measurement-slot order."""
    n = program.qubit_count if n is None else n
    _check_qubits(n)
    steps = _circuit_steps(program) if isinstance(program, Circuit) else _program_steps(program)
    slots = sorted(step.slot for step in steps if step.kind == "measure")
    if len(slots) > MAX_MEASUREMENTS:
        raise OracleLimitError(f"Oracle supports at most {MAX_MEASUREMENTS} measurements.")
    position = {slot: index for index, slot in enumerate(slots)}
    if len(position) != len(slots):
        raise ProvenanceError("Duplicate measurement provenance.")

    state = np.zeros((2**n, 1), dtype=complex)
    state[0, 0] = 1.0
    result: OutcomeDistribution = {}
    _explore(steps, 0, state, 1.0, ["0"] * len(slots), position, n, result)
    return result


def _explore(
    steps: list[_Step],
    index: int,
    state: np.ndarray,
    weight: float,
    bits: list[str],
    position: dict[int, int],
    n: int,
    result: OutcomeDistribution,
) -> None:
    while index < len(steps):
        step = steps[index]
        if step.kind == "unitary":
            if isinstance(step.op, Rotation):
                state = apply_rotation(state, step.op, n)
            else:
                state = apply_gate(state, step.op, n)
        elif step.kind == "init":
            # Reset channel: the |0> part stays, the |1> part is flipped to |0>.
            keep = _bit_values(n, step.qubit) == 0
            flipped = np.arange(2**n) ^ (1 << step.qubit)
            for branch in (np.where(keep[:, None], state, 0), np.where(keep[:, None], state[flipped], 0)):
                probability = float(np.vdot(branch, branch).real)
                if probability * weight < _PRUNE:
                    continue
                _explore(
                    steps,
                    index + 1,
                    branch / math.sqrt(probability),
                    weight * probability,
                    bits,
                    position,
                    n,
                    result,
                )
            return
        else:
            image = apply_pauli(state, step.axis, n)
            for outcome, sign in (("0", 1.0), ("1", -1.0)):
                branch = 0.5 * (state + sign * image)
                probability = float(np.vdot(branch, branch).real)
                if probability * weight < _PRUNE:
                    continue
                branch_bits = list(bits)
                branch_bits[position[step.slot]] = outcome
                _explore(
                    steps,
                    index + 1,
                    branch / math.sqrt(probability),
                    weight * probability,
                    branch_bits,
                    position,
                    n,
                    result,
                )
            return
        index += 1
    key = "".join(bits)
    result[key] = result.get(key, 0.0) + weight


def total_variation(p: OutcomeDistribution, q: OutcomeDistribution) -> float:
    keys = set(p) | set(q)
    return 0.5 * sum(abs(p.get(key, 0.0) - q.get(key, 0.0)) for key in keys)


def equivalent(a: Circuit, b: IsaProgram | Circuit, tol: float = 1e-9) -> bool:
    """True when both programs yield the same outcome distribution within `tol`."""
    if a.qubit_count != b.qubit_count:
        raise ProvenanceError(f"Qubit counts differ: {a.qubit_count} vs {b.qubit_count}.")
    expected = a.count("measure")
    if isinstance(b, IsaProgram):
        ids = [instr.measurement_id for instr in b.instructions if instr.is_measurement]
        if None in ids or sorted(ids) != list(range(expected)):
            raise ProvenanceError("ISA measurements do not map one-to-one onto circuit measurements.")
    elif b.count("measure") != expected:
        raise ProvenanceError("Circuits measure a different number of qubits.")
    return total_variation(distribution(a), distribution(b)) <= tol


def random_clifford_t_circuit(
    rng: np.random.Generator,
    max_qubits: int = 4,
    max_gates: int = 25,
    max_measurements: int = 6,
) -> Circuit:
    """Random circuit over {H, S, S†, T, T†, CX, CZ} with terminal measurements."""
    n = int(rng.integers(1, max_qubits + 1))
    makers = [h, s, sdg, t, tdg] + ([cx, cz] if n > 1 else [])
    gates: list[Gate] = [init(q) for q in range(n)]
    for _ in range(int(rng.integers(0, max_gates + 1))):
        maker = makers[int(rng.integers(0, len(makers)))]
        if maker in (cx, cz):
            a, b = rng.choice(n, size=2, replace=False)
            gates.append(maker(int(a), int(b)))
        else:
            gates.append(maker(int(rng.integers(0, n))))
    measured = int(rng.integers(1, min(n, max_measurements) + 1))
    gates.extend(measure(int(q)) for q in rng.permutation(n)[:measured])
    return Circuit(n, tuple(gates))


def random_circuits(seed: int, count: int, **kwargs) -> Iterable[Circuit]:
    """Seeded stream of random Clifford+T circuits."""
    rng = np.random.default_rng(seed)
    for _ in range(count):
        yield random_clifford_t_circuit(rng, **kwargs)
