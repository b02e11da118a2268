"""Unit tests for the config module behavior."""

import os
from pathlib import Path
import tempfile
import unittest
from unittest.mock import patch

from lapbc_sim.config import (
    ConfigValidationError,
    RunConfig,
    Settings,
    build_run_config,
    normalize_key,
    parse_config_file,
    validate_run_config,
)

try:
    import jsonschema  # noqa: F401

    HAS_JSONSCHEMA = True
except ModuleNotFoundError:
    HAS_JSONSCHEMA = False

try:
    import yaml  # noqa: F401

    HAS_YAML = True
except ModuleNotFoundError:
    HAS_YAML = False


def _settings(**overrides: str) -> Settings:
    with patch.dict(os.environ, {}, clear=True):
        base = Settings.from_env()
    return Settings(
        verbose=False,
        defaults_path=base.defaults_path,
        output_root=base.output_root,
        overrides=dict(overrides),
    )


class ParseConfigFileTests(unittest.TestCase):
    def test_key_value_lines(self) -> None:
        """Verify that key value lines."""
        text = "# run\nd = 11\np-success = 0.5  # bump\nD = 2\n\nlayout=sparse\n"
        self.assertEqual(
            parse_config_file(text),
            {"d": "11", "p_success": "0.5", "distill_patches": "2", "layout": "sparse"},
        )

    def test_errors_carry_line_numbers(self) -> None:
        """Verify that errors carry line numbers."""
        with self.assertRaises(ConfigValidationError) as ctx:
            parse_config_file("d = 11\nbogus\n")
        self.assertIn("line 2", str(ctx.exception))
        with self.assertRaises(ConfigValidationError) as ctx:
            parse_config_file("colour = red\n")
        self.assertIn("line 1", str(ctx.exception))

    def test_normalize_key(self) -> None:
        """Verify that normalize key."""
        self.assertEqual(normalize_key("D"), "distill_patches")
        self.assertEqual(normalize_key("d"), "d")
        self.assertEqual(normalize_key("J"), "J")
        self.assertEqual(normalize_key("length-stddev"), "length_stddev")


class SettingsTests(unittest.TestCase):
    def test_from_env(self) -> None:
        """Verify that from env."""
        env = {"LAPBC_VERBOSE": "yes", "LAPBC_D": "9", "LAPBC_SEED": "", "LAPBC_OUTPUT_ROOT": "/tmp/runs"}
        with patch.dict(os.environ, env, clear=True):
            settings = Settings.from_env()
        self.assertTrue(settings.verbose)
        self.assertEqual(settings.overrides, {"d": "9"})
        self.assertEqual(settings.output_root, Path("/tmp/runs"))
        self.assertTrue(settings.defaults_path.name.endswith("defaults.yaml"))


class RunConfigTests(unittest.TestCase):
    def test_derived_values(self) -> None:
        """Verify that derived values."""
        config = RunConfig(width=6, height=4)
        self.assertEqual(config.qubit_count, 24)
        self.assertEqual(config.grid(), (4, 6))
        self.assertEqual(config.benchmark_id(), "rcs_6x4_l500")
        self.assertEqual(RunConfig(benchmark="ising", steps=2).benchmark_id(), "ising_6x6_s2")
        self.assertEqual(RunConfig(data_grid="8x8").grid(), (8, 8))
        self.assertEqual(RunConfig(d=9).schedule_params().surgery_tail, 15)
        self.assertEqual(RunConfig(p_success=0.5).runtime_params().p_success, 0.5)


@unittest.skipUnless(HAS_JSONSCHEMA, "jsonschema not installed")
class ValidateRunConfigTests(unittest.TestCase):
    def test_coerces_strings(self) -> None:
        """Verify that coerces strings."""
        config = validate_run_config({"d": "11", "p-success": "0.4", "hold_distill": "true", "mapping": "none"})
        self.assertEqual(config.d, 11)
        self.assertEqual(config.p_success, 0.4)
        self.assertTrue(config.hold_distill)
        self.assertIsNone(config.mapping)

    def test_schema_ranges(self) -> None:
        """Verify that schema ranges."""
        for payload in (
            {"d": 4},
            {"d": 1},
            {"p_success": 0},
            {"p_success": 1.5},
            {"layout": "hex"},
            {"trials": 0},
            {"rho": 1},
            {"data_grid": "8by8"},
        ):
            with self.subTest(payload=payload):
                with self.assertRaises(ConfigValidationError):
                    validate_run_config(payload)

    def test_rejects_bad_values(self) -> None:
        """Verify that rejects bad values."""
        with self.assertRaises(ConfigValidationError):
            validate_run_config({"d": "eleven"})
        with self.assertRaises(ConfigValidationError):
            validate_run_config({"d": None})
        with self.assertRaises(ConfigValidationError):
            validate_run_config({"speed": 1})

    def test_data_grid_must_hold_the_benchmark(self) -> None:
        """Verify that data grid must hold the benchmark."""
        with self.assertRaises(ConfigValidationError):
            validate_run_config({"width": 6, "height": 6, "data_grid": "5x5"})
        self.assertEqual(validate_run_config({"width": 6, "height": 6, "data_grid": "6x7"}).grid(), (6, 7))

    def test_replace_revalidates(self) -> None:
        """Verify that replace revalidates."""
        config = validate_run_config({})
        self.assertEqual(config.replace(p_success=0.9).p_success, 0.9)
        with self.assertRaises(ConfigValidationError):
            config.replace(m=0)


@unittest.skipUnless(HAS_JSONSCHEMA and HAS_YAML, "jsonschema or PyYAML not installed")
class BuildRunConfigTests(unittest.TestCase):
    def test_packaged_defaults(self) -> None:
        """Verify that packaged defaults."""
        config = build_run_config(settings=_settings())
        self.assertEqual((config.d, config.m, config.distill_patches), (15, 27, 4))
        self.assertEqual(config.p_success, 0.25)
        self.assertEqual(config.layout, "standard")

    def test_precedence(self) -> None:
        """Verify that precedence."""
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "run.cfg"
            path.write_text("d = 11\nm = 30\n", encoding="utf-8")
            config = build_run_config(
                settings=_settings(d="9", m="20", seed="4"),
                config_path=path,
                cli_values={"d": 13, "trials": None},
            )
        self.assertEqual(config.d, 13)
        self.assertEqual(config.m, 30)
        self.assertEqual(config.seed, 4)
        self.assertEqual(config.trials, 20)

    def test_missing_config_file(self) -> None:
        """Verify that missing config file."""
        with self.assertRaises(ConfigValidationError):
            build_run_config(settings=_settings(), config_path=Path("/nonexistent/run.cfg"))


if __name__ == "__main__":
    unittest.main()
