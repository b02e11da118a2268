"""Unit tests for the synthesis module behavior."""

import math
import unittest

import numpy as np

from lapbc_sim.circuit import Circuit, h, init, measure, rz, t
from lapbc_sim.synthesis import SynthesisParams, sample_length, synthesize


def _one_rotation(qubit_count: int = 2, qubit: int = 1) -> Circuit:
    gates = [init(q) for q in range(qubit_count)]
    gates += [h(qubit), rz(qubit, 0.3), h(qubit)]
    gates += [measure(q) for q in range(qubit_count)]
    return Circuit(qubit_count, tuple(gates))


class SynthesisParamsTests(unittest.TestCase):
    def test_derived_lengths(self) -> None:
        """Verify that derived lengths."""
        params = SynthesisParams(rho=1e-7)
        self.assertAlmostEqual(params.delta, math.log2(1e7))
        self.assertAlmostEqual(params.mean_length, 1.5 * math.log2(1e7))

    def test_rejects_out_of_range(self) -> None:
        """Verify that rejects out of range."""
        for kwargs in ({"rho": 0.0}, {"rho": 1.0}, {"length_stddev": -1.0}, {"rounding": "ceil"}):
            with self.subTest(kwargs=kwargs):
                with self.assertRaises(ValueError):
                    SynthesisParams(**kwargs)


class SynthesizeTests(unittest.TestCase):
    def test_circuit_without_rz_is_returned_unchanged(self) -> None:
        """Verify that circuit without rz is returned unchanged."""
        circuit = Circuit(1, (init(0), h(0), t(0), measure(0)))
        self.assertIs(synthesize(circuit, SynthesisParams()), circuit)

    def test_zero_spread_length_rounds_to_nearest(self) -> None:
        """Verify that zero spread length rounds to nearest."""
        expected = math.floor(1.5 * math.log2(1e7) + 0.5)
        out = synthesize(_one_rotation(), SynthesisParams(rho=1e-7, length_stddev=0.0))
        self.assertEqual(out.count("rz"), 0)
        self.assertEqual(out.count("pi8"), expected)
        self.assertEqual(out.count("pi4"), 2)
        self.assertEqual(expected, 35)

    def test_floor_rounding(self) -> None:
        """Verify that floor rounding."""
        out = synthesize(_one_rotation(), SynthesisParams(length_stddev=0.0, rounding="floor"))
        self.assertEqual(out.count("pi8"), 34)

    def test_tail_shape_and_placement(self) -> None:
        """Verify that tail shape and placement."""
        out = synthesize(_one_rotation(qubit=1), SynthesisParams(seed=4))
        kinds = [gate.kind for gate in out.instructions]
        first = kinds.index("pi8")
        last = len(kinds) - 1 - kinds[::-1].index("pi4")
        tail = out.instructions[first: last + 1]
        self.assertEqual([gate.kind for gate in tail[-2:]], ["pi4", "pi4"])
        self.assertTrue(all(gate.kind == "pi8" for gate in tail[:-2]))
        self.assertTrue(all(gate.qubits == (1,) for gate in tail))
        self.assertEqual(out.instructions[first - 1], h(1))
        self.assertEqual(out.instructions[last + 1], h(1))

    def test_seed_determinism(self) -> None:
        """Verify that seed determinism."""
        circuit = _one_rotation()
        self.assertEqual(
            synthesize(circuit, SynthesisParams(seed=9)), synthesize(circuit, SynthesisParams(seed=9))
        )

    def test_mean_length_over_many_rotations(self) -> None:
        """Verify that mean length over many rotations."""
        gates = [init(0)] + [rz(0, 0.1)] * 400 + [measure(0)]
        out = synthesize(Circuit(1, tuple(gates)), SynthesisParams(seed=2))
        mean = out.count("pi8") / 400
        self.assertAlmostEqual(mean, 1.5 * math.log2(1e7), delta=0.35)
        self.assertEqual(out.count("pi4"), 800)


class SampleLengthTests(unittest.TestCase):
    def test_negative_draws_clamp_to_zero_with_warning(self) -> None:
        """Verify that negative draws clamp to zero with warning."""
        params = SynthesisParams(rho=0.5, length_stddev=100.0)
        rng = np.random.default_rng(0)
        with self.assertLogs("lapbc_sim.synthesis", level="WARNING"):
            lengths = [sample_length(params, rng) for _ in range(60)]
        self.assertIn(0, lengths)
        self.assertTrue(all(length >= 0 for length in lengths))


if __name__ == "__main__":
    unittest.main()
