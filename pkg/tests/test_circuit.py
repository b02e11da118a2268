"""Unit tests for the circuit module behavior."""

import math
import unittest

from lapbc_sim.circuit import (
    TAU,
    Circuit,
    CircuitError,
    Gate,
    cx,
    h,
    init,
    measure,
    parse_ir,
    placeholder,
    reduce_angle,
    rz,
    serialize,
    t,
)
from lapbc_sim.pauli import SignedPauli


SAMPLE = """\
# two-qubit sample
qubits 2
init 0
init 1
h 0
cx 0 1
t 1
rz 0 0.5
pi8 1 -Y
measure 0
measure 1
"""


class ParseIrTests(unittest.TestCase):
    def test_parse_sample(self) -> None:
        """Verify that parse sample."""
        circuit = parse_ir(SAMPLE)
        self.assertEqual(circuit.qubit_count, 2)
        self.assertEqual(len(circuit.instructions), 9)
        self.assertEqual(circuit.count("init"), 2)
        self.assertEqual(circuit.count("measure"), 2)
        self.assertEqual(circuit.instructions[3], cx(0, 1))
        self.assertEqual(circuit.instructions[5].angle, 0.5)
        self.assertEqual(circuit.instructions[6], placeholder("pi8", 1, "Y", sign=-1))

    def test_serialize_then_parse_preserves_circuit(self) -> None:
        """Verify that serialize then parse preserves circuit."""
        circuit = parse_ir(SAMPLE)
        self.assertEqual(parse_ir(serialize(circuit)), circuit)
        self.assertIn("pi8 1 -Y", serialize(circuit))
        self.assertTrue(serialize(circuit).startswith("qubits 2\n"))

    def test_missing_header(self) -> None:
        """Verify that missing header."""
        with self.assertRaises(CircuitError) as ctx:
            parse_ir("")
        self.assertIsNone(ctx.exception.line)
        with self.assertRaises(CircuitError) as ctx:
            parse_ir("h 0\nqubits 1\n")
        self.assertEqual(ctx.exception.line, 1)

    def test_errors_carry_line_numbers(self) -> None:
        """Verify that errors carry line numbers."""
        cases = {
            "qubits 2\nh 2\n": 2,
            "qubits 2\nfoo 0\n": 2,
            "qubits 2\ncx 0 0\n": 2,
            "qubits 1\nrz 0 7.0\n": 2,
            "qubits 1\nrz 0 abc\n": 2,
            "qubits 1\nh 0\n\ninit 0\n": 4,
            "qubits 1\nmeasure 0\nh 0\n": 3,
            "qubits 1\npi4 0 X\n": 2,
            "qubits 1\nqubits 2\n": 2,
        }
        for text, line in cases.items():
            with self.subTest(text=text):
                with self.assertRaises(CircuitError) as ctx:
                    parse_ir(text)
                self.assertEqual(ctx.exception.line, line)
                self.assertIn(f"line {line}", str(ctx.exception))


class GateTests(unittest.TestCase):
    def test_gate_validation(self) -> None:
        """Verify that gate validation."""
        with self.assertRaises(CircuitError):
            Gate("h", (0, 1))
        with self.assertRaises(CircuitError):
            Gate("rz", (0,))
        with self.assertRaises(CircuitError):
            Gate("h", (0,), angle=0.1)
        with self.assertRaises(CircuitError):
            Gate("pi8", (0,))
        with self.assertRaises(CircuitError):
            Gate("pi8", (1,), axis=SignedPauli.single(0, "X"))

    def test_to_text(self) -> None:
        """Verify that to text."""
        self.assertEqual(cx(2, 3).to_text(), "cx 2 3")
        self.assertEqual(rz(1, 0.25).to_text(), "rz 1 0.25")
        self.assertEqual(placeholder("pi4", 0, "Z").to_text(), "pi4 0 +Z")

    def test_circuit_invariants(self) -> None:
        """Verify that circuit invariants."""
        Circuit(1, (init(0), h(0), t(0), measure(0)))
        with self.assertRaises(CircuitError):
            Circuit(1, (h(0), init(0)))
        with self.assertRaises(CircuitError):
            Circuit(1, (measure(0), measure(0)))
        with self.assertRaises(CircuitError):
            Circuit(0, ())


class ReduceAngleTests(unittest.TestCase):
    def test_reduce_angle(self) -> None:
        """Verify that reduce angle."""
        self.assertAlmostEqual(reduce_angle(-0.5), TAU - 0.5)
        self.assertEqual(reduce_angle(TAU), 0.0)
        self.assertAlmostEqual(reduce_angle(3 * math.pi), math.pi)
        self.assertEqual(reduce_angle(0.25), 0.25)


if __name__ == "__main__":
    unittest.main()
