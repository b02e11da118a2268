"""Unit tests for the isa module behavior."""

import unittest

from lapbc_sim.isa import (
    EIGHTH,
    INIT,
    LAPBC,
    MEAS,
    MEASM,
    QUARTER,
    SPC,
    IsaError,
    IsaInstruction,
    IsaProgram,
    eighth,
    init_instr,
    measurement,
    parse_isa,
    quarter,
)
from lapbc_sim.pauli import SignedPauli


LAPBC_TEXT = """\
flavor lapbc
qubits 3
init 0
quarter +X0X1
eighth -Y1
meas +Z1 @0
meas -Y2 @1
"""


class IsaInstructionTests(unittest.TestCase):
    def test_parse_line(self) -> None:
        """Verify that parse line."""
        instr = IsaInstruction.parse("measm -Z0Z1 @3")
        self.assertEqual(instr.kind, MEASM)
        self.assertEqual(instr.axis, SignedPauli.parse("-Z0Z1"))
        self.assertEqual(instr.measurement_id, 3)
        self.assertEqual(instr.to_text(), "measm -Z0Z1 @3")
        self.assertEqual(IsaInstruction.parse("init 4"), init_instr(4))

    def test_rejects_malformed_lines(self) -> None:
        """Verify that rejects malformed lines."""
        for line in ("jump 3", "init", "init x", "eighth", "eighth +Z0 +X1", "meas +Z0Z1", "eighth +Z0 @1"):
            with self.subTest(line=line):
                with self.assertRaises(IsaError):
                    IsaInstruction.parse(line)

    def test_measurement_picks_kind_by_weight(self) -> None:
        """Verify that measurement picks kind by weight."""
        self.assertEqual(measurement(SignedPauli.parse("+X2")).kind, MEAS)
        self.assertEqual(measurement(SignedPauli.parse("+X2Z3"), 1).kind, MEASM)

    def test_support(self) -> None:
        """Verify that support."""
        self.assertEqual(init_instr(2).support(), frozenset({2}))
        self.assertEqual(quarter(SignedPauli.parse("Z0X4")).support(), frozenset({0, 4}))
        self.assertTrue(measurement(SignedPauli.parse("Z0")).is_measurement)
        self.assertFalse(eighth(SignedPauli.parse("Z0")).is_measurement)


class IsaProgramTests(unittest.TestCase):
    def test_parse_program(self) -> None:
        """Verify that parse program."""
        program = parse_isa(LAPBC_TEXT)
        self.assertEqual(program.flavor, LAPBC)
        self.assertEqual(program.qubit_count, 3)
        self.assertEqual(
            [instr.kind for instr in program.instructions], [INIT, QUARTER, EIGHTH, MEAS, MEAS]
        )
        self.assertEqual(program.count(MEAS), 2)
        self.assertEqual(parse_isa(program.to_text()), program)
        self.assertEqual(program.to_dict()["instructions"][1], "quarter +X0X1")

    def test_lapbc_weight_rules(self) -> None:
        """Verify that lapbc weight rules."""
        bad = [
            eighth(SignedPauli.parse("Z0Z1")),
            quarter(SignedPauli.parse("X0")),
            quarter(SignedPauli.parse("X0X1X2")),
            measurement(SignedPauli.parse("Z0Z1"), 0),
        ]
        for instr in bad:
            with self.subTest(instr=instr.to_text()):
                with self.assertRaises(IsaError):
                    IsaProgram(LAPBC, 3, (instr,))

    def test_spc_has_no_quarters(self) -> None:
        """Verify that spc has no quarters."""
        IsaProgram(SPC, 2, (eighth(SignedPauli.parse("Z0Z1")), measurement(SignedPauli.parse("X0Y1"), 0)))
        with self.assertRaises(IsaError):
            IsaProgram(SPC, 2, (quarter(SignedPauli.parse("Z0Z1")),))

    def test_register_bounds(self) -> None:
        """Verify that register bounds."""
        with self.assertRaises(IsaError):
            IsaProgram(LAPBC, 2, (eighth(SignedPauli.parse("Z2")),))
        with self.assertRaises(IsaError):
            IsaProgram("pbc", 2, ())

    def test_headers_required(self) -> None:
        """Verify that headers required."""
        with self.assertRaises(IsaError):
            parse_isa("qubits 2\ninit 0\n")
        with self.assertRaises(IsaError) as ctx:
            parse_isa("flavor lapbc\nqubits 2\ninit 0\nbogus +Z0\n")
        self.assertIn("line 4", str(ctx.exception))


if __name__ == "__main__":
    unittest.main()
