"""Unit tests for the cli module behavior."""

from contextlib import redirect_stderr, redirect_stdout
import io
import json
from pathlib import Path
import tempfile
import unittest

from lapbc_sim.cli import _fit_grid, build_parser, main

try:
    import jsonschema  # noqa: F401
    import yaml  # noqa: F401

    HAS_DEPS = True
except ModuleNotFoundError:
    HAS_DEPS = False


def _run(argv: list[str]) -> tuple[int, str, str]:
    stdout, stderr = io.StringIO(), io.StringIO()
    code = 0
    with redirect_stdout(stdout), redirect_stderr(stderr):
        try:
            main(argv)
        except SystemExit as exc:
            code = exc.code if isinstance(exc.code, int) else 1
    return code, stdout.getvalue(), stderr.getvalue()


class ParserTests(unittest.TestCase):
    def test_shared_flags(self) -> None:
        """Verify that shared flags."""
        args = build_parser().parse_args(["compare", "--D", "2", "--p-success", "0.5", "--hold-distill"])
        self.assertEqual(args.distill_patches, 2)
        self.assertEqual(args.p_success, 0.5)
        self.assertTrue(args.hold_distill)
        self.assertIsNone(args.d)

    def test_subcommand_required(self) -> None:
        """Verify that subcommand required."""
        code, _, _ = _run([])
        self.assertEqual(code, 2)

    def test_fit_grid(self) -> None:
        """Verify that fit grid."""
        self.assertEqual(_fit_grid(4), (2, 2))
        self.assertEqual(_fit_grid(5), (2, 3))
        self.assertEqual(_fit_grid(1), (1, 1))


@unittest.skipUnless(HAS_DEPS, "jsonschema or PyYAML not installed")
class CommandTests(unittest.TestCase):
    def test_stage_chain_through_files(self) -> None:
        """Verify that stage chain through files."""
        with tempfile.TemporaryDirectory() as tmp:
            root = Path(tmp)
            steps = [
                ["gen-rcs", "--width", "2", "--height", "2", "--layers", "3", "--seed", "1", "--out", str(root / "c.ir")],
                ["synth", str(root / "c.ir"), "--out", str(root / "s.ir")],
                ["transpile", str(root / "s.ir"), "--out", str(root / "p.isa")],
                [
                    "schedule",
                    str(root / "p.isa"),
                    "--data-grid",
                    "2x2",
                    "--csv",
                    str(root / "t.csv"),
                    "--out",
                    str(root / "s.json"),
                ],
                ["simulate", str(root / "s.json"), "--trials", "3", "--out", str(root / "r.csv")],
            ]
            for argv in steps:
                code, _, stderr = _run(argv)
                self.assertEqual(code, 0, f"{argv[0]}: {stderr}")

            self.assertTrue((root / "c.ir").read_text(encoding="utf-8").startswith("qubits 4\n"))
            self.assertTrue((root / "p.isa").read_text(encoding="utf-8").startswith("flavor lapbc\n"))
            payload = json.loads((root / "s.json").read_text(encoding="utf-8"))
            self.assertEqual(payload["layout"]["grid"], ["DRD", "RRR", "DRD"])
            self.assertTrue((root / "t.csv").read_text(encoding="utf-8").startswith("patch_row,"))
            trials = (root / "r.csv").read_text(encoding="utf-8").splitlines()
            self.assertEqual(trials[0], "trial,total_cycles,delayed_distills,added_cycles")
            self.assertEqual(len(trials), 4)

    def test_snapshot_only(self) -> None:
        """Verify that snapshot only."""
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "p.isa"
            path.write_text("flavor lapbc\nqubits 1\neighth +Z0\n", encoding="utf-8")
            code, stdout, _ = _run(["schedule", str(path), "--snapshot", "0"])
        self.assertEqual(code, 0)
        self.assertTrue(stdout.startswith("cycle 0 / makespan 51\n"))
        self.assertNotIn("{", stdout)

    def test_compare_prints_csv(self) -> None:
        """Verify that compare prints csv."""
        code, stdout, _ = _run(
            ["compare", "--width", "2", "--height", "2", "--layers", "4", "--trials", "2"]
        )
        self.assertEqual(code, 0)
        lines = stdout.splitlines()
        self.assertTrue(lines[0].startswith("benchmark_id,layout,n,"))
        self.assertTrue(lines[1].startswith("rcs_2x2_l4,standard,4,"))

    def test_sweep_writes_report(self) -> None:
        """Verify that sweep writes report."""
        with tempfile.TemporaryDirectory() as tmp:
            out = Path(tmp) / "sweep.csv"
            code, stdout, _ = _run(
                ["sweep", "--width", "2", "--height", "2", "--layers", "4", "--trials", "2",
                 "--p-values", "0.5,1", "--out", str(out)]
            )
            self.assertEqual(code, 0)
            self.assertEqual(len(out.read_text(encoding="utf-8").splitlines()), 3)
        self.assertIn("| rcs_2x2_l4 |", stdout)

    def test_stage_failures_are_labelled(self) -> None:
        """Verify that stage failures are labelled."""
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "raw.ir"
            path.write_text("qubits 1\ninit 0\nrz 0 0.3\nmeasure 0\n", encoding="utf-8")
            code, _, stderr = _run(["transpile", str(path)])
            self.assertEqual(code, 1)
            self.assertIn("Error [transpile-lapbc]:", stderr)

            code, _, stderr = _run(["synth", str(Path(tmp) / "missing.ir")])
            self.assertEqual(code, 1)
            self.assertIn("Error [input]:", stderr)

    def test_bad_config_value(self) -> None:
        """Verify that bad config value."""
        code, _, stderr = _run(["compare", "--d", "4"])
        self.assertEqual(code, 1)
        self.assertIn("Error [config]:", stderr)

    def test_bad_p_values(self) -> None:
        """Verify that bad p values."""
        code, _, stderr = _run(["sweep", "--width", "2", "--height", "2", "--p-values", "low"])
        self.assertEqual(code, 1)
        self.assertIn("Error [config]:", stderr)


if __name__ == "__main__":
    unittest.main()
