"""Unit tests for the oracle module behavior."""

import math
import unittest

import numpy as np

from lapbc_sim.circuit import Circuit, cx, h, init, measure, placeholder, s, t
from lapbc_sim.isa import LAPBC, IsaProgram, eighth, measurement, parse_isa
from lapbc_sim.oracle import (
    MAX_QUBITS,
    OracleLimitError,
    ProvenanceError,
    distribution,
    equivalent,
    random_circuits,
    total_variation,
    unitary_of,
)
from lapbc_sim.pauli import SignedPauli
from lapbc_sim.transpiler import lapbc_transpile, spc_transpile


class DistributionTests(unittest.TestCase):
    def test_hadamard_is_uniform(self) -> None:
        """Verify that hadamard is uniform."""
        result = distribution(Circuit(1, (init(0), h(0), measure(0))))
        self.assertAlmostEqual(result["0"], 0.5)
        self.assertAlmostEqual(result["1"], 0.5)

    def test_bell_pair_is_correlated(self) -> None:
        """Verify that bell pair is correlated."""
        result = distribution(Circuit(2, (init(0), init(1), h(0), cx(0, 1), measure(0), measure(1))))
        self.assertAlmostEqual(result.get("00", 0.0), 0.5)
        self.assertAlmostEqual(result.get("11", 0.0), 0.5)
        self.assertAlmostEqual(total_variation(result, {"00": 0.5, "11": 0.5}), 0.0)

    def test_t_on_zero_is_deterministic(self) -> None:
        """Verify that t on zero is deterministic."""
        result = distribution(Circuit(1, (t(0), measure(0))))
        self.assertAlmostEqual(result["0"], 1.0)

    def test_eighth_rotation_tilts_the_state(self) -> None:
        """Verify that eighth rotation tilts the state."""
        program = parse_isa("flavor lapbc\nqubits 1\neighth +X0\nmeas +Z0 @0\n")
        result = distribution(program)
        self.assertAlmostEqual(result["1"], math.sin(math.pi / 8) ** 2)

    def test_init_resets_an_entangled_qubit(self) -> None:
        """Verify that init acts as a reset channel and leaves its partner's statistics alone."""
        body = "flavor lapbc\nqubits 2\neighth +X0\nquarter +Z0X1\n{reset}meas +Y1 @0\nmeas +Z0 @1\n"
        cos2 = math.cos(math.pi / 8) ** 2
        sin2 = math.sin(math.pi / 8) ** 2
        correlated = distribution(parse_isa(body.format(reset="")))
        self.assertAlmostEqual(total_variation(correlated, {"00": cos2, "11": sin2}), 0.0)
        reset = distribution(parse_isa(body.format(reset="init 0\n")))
        self.assertAlmostEqual(total_variation(reset, {"00": cos2, "10": sin2}), 0.0)
        self.assertAlmostEqual(sum(reset.values()), 1.0)

    def test_qubit_limit(self) -> None:
        """Verify that qubit limit."""
        with self.assertRaises(OracleLimitError):
            distribution(Circuit(MAX_QUBITS + 1, (measure(0),)))


class UnitaryTests(unittest.TestCase):
    def test_hadamard_matrix(self) -> None:
        """Verify that hadamard matrix."""
        expected = np.array([[1, 1], [1, -1]]) / math.sqrt(2.0)
        np.testing.assert_allclose(unitary_of([h(0)], 1), expected, atol=1e-12)

    def test_cx_is_little_endian(self) -> None:
        """Verify that cx is little endian."""
        matrix = unitary_of([cx(0, 1)], 2)
        self.assertAlmostEqual(abs(matrix[3, 1]), 1.0)
        self.assertAlmostEqual(abs(matrix[2, 2]), 1.0)


class EquivalenceTests(unittest.TestCase):
    def test_random_circuits_survive_both_transpilers(self) -> None:
        """Verify that random circuits survive both transpilers."""
        for index, circuit in enumerate(random_circuits(seed=2024, count=200)):
            with self.subTest(index=index):
                self.assertTrue(equivalent(circuit, spc_transpile(circuit)))
                self.assertTrue(equivalent(circuit, lapbc_transpile(circuit)))

    def test_placeholder_rotations(self) -> None:
        """Verify that placeholder rotations."""
        gates = (
            init(0),
            init(1),
            h(0),
            placeholder("pi8", 0, "Y"),
            placeholder("pi4", 1, "X", sign=-1),
            cx(1, 0),
            s(1),
            placeholder("pi8", 1, "Z", sign=-1),
            measure(1),
            measure(0),
        )
        circuit = Circuit(2, gates)
        self.assertTrue(equivalent(circuit, spc_transpile(circuit)))
        self.assertTrue(equivalent(circuit, lapbc_transpile(circuit)))

    def test_detects_a_wrong_program(self) -> None:
        """Verify that detects a wrong program."""
        circuit = Circuit(1, (t(0), measure(0)))
        wrong = IsaProgram(LAPBC, 1, (eighth(SignedPauli.parse("X0")), measurement(SignedPauli.parse("Z0"), 0)))
        self.assertFalse(equivalent(circuit, wrong))

    def test_provenance_mismatch(self) -> None:
        """Verify that provenance mismatch."""
        circuit = Circuit(1, (t(0), measure(0)))
        shifted = IsaProgram(LAPBC, 1, (measurement(SignedPauli.parse("Z0"), 5),))
        with self.assertRaises(ProvenanceError):
            equivalent(circuit, shifted)
        with self.assertRaises(ProvenanceError):
            equivalent(circuit, Circuit(2, (measure(0),)))


if __name__ == "__main__":
    unittest.main()
