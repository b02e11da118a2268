"""Settings and run configuration.

Settings come from environment variables (after loading a .env file) and cover
process-level concerns: verbosity, where defaults and outputs live, worker count.

RunConfig is one experiment's parameter set, assembled in precedence order:
packaged defaults.yaml < LAPBC_* environment overrides < `key = value` config
file < command-line flags. The result is checked against
schemas/run_config.schema.json and then against cross-field rules.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, fields
import os
from pathlib import Path
from typing import Any, Mapping

try:
    from dotenv import load_dotenv
except ModuleNotFoundError:  # pragma: no cover - fallback for minimally provisioned envs
    def load_dotenv() -> bool:
        """Load dotenv."""
        return False

load_dotenv()

from .contracts import ContractValidationError, validate_run_config_payload
from .layout import LayoutError, parse_grid
from .runtime import RuntimeParams
from .scheduler import ScheduleParams
from .synthesis import SynthesisParams


DEFAULTS_PATH = Path(__file__).resolve().parent / "config" / "defaults.yaml"

ENV_OVERRIDES = {
    "LAPBC_D": "d",
    "LAPBC_M": "m",
    "LAPBC_P_SUCCESS": "p_success",
    "LAPBC_DISTILL_PATCHES": "distill_patches",
    "LAPBC_RHO": "rho",
    "LAPBC_SEED": "seed",
    "LAPBC_TRIALS": "trials",
    "LAPBC_WORKERS": "workers",
}


class ConfigValidationError(ValueError):
    """Raised for unreadable or out-of-range run configuration."""


def _as_bool(value: Any, default: bool = False) -> bool:
    """Interpret common truthy spellings."""
    if value is None:
        return default
    if isinstance(value, bool):
        return value
    return str(value).strip().lower() in {"1", "true", "yes", "on"}


@dataclass(frozen=True)
class Settings:
    verbose: bool
    defaults_path: Path
    output_root: Path
    overrides: dict[str, str]

    @staticmethod
    def from_env() -> "Settings":
        """Load process settings from environment variables."""
        overrides = {
            key: os.environ[name]
            for name, key in ENV_OVERRIDES.items()
            if os.getenv(name) not in (None, "")
        }
        return Settings(
            verbose=_as_bool(os.getenv("LAPBC_VERBOSE", "false")),
            defaults_path=Path(os.getenv("LAPBC_DEFAULTS_PATH") or DEFAULTS_PATH),
            output_root=Path(os.getenv("LAPBC_OUTPUT_ROOT", "eval/results")),
            overrides=overrides,
        )


@dataclass(frozen=True)
class RunConfig:
    d: int = 15
    m: int = 27
    p_success: float = 0.25
    distill_patches: int = 4
    rho: float = 1e-7
    length_stddev: float = 2.0
    length_rounding: str = "round"
    seed: int = 0
    trials: int = 20
    layout: str = "standard"
    data_grid: str | None = None
    mapping: str | None = None
    benchmark: str = "rcs"
    width: int = 6
    height: int = 6
    layers: int = 500
    steps: int = 1
    J: float = 1.0
    g: float = 1.0
    t: float = 1.0
    hold_distill: bool = False
    workers: int = 1
    out: str | None = None

    @property
    def qubit_count(self) -> int:
        return self.width * self.height

    def grid(self) -> tuple[int, int]:
        """Logical data grid (a, b); the benchmark grid unless data_grid is set."""
        if self.data_grid:
            return parse_grid(self.data_grid)
        return self.height, self.width

    def benchmark_id(self) -> str:
        if self.benchmark == "ising":
            return f"ising_{self.width}x{self.height}_s{self.steps}"
        return f"rcs_{self.width}x{self.height}_l{self.layers}"

    def schedule_params(self) -> ScheduleParams:
        return ScheduleParams(
            d=self.d,
            m=self.m,
            distill_patches=self.distill_patches,
            hold_distill=self.hold_distill,
        )

    def runtime_params(self) -> RuntimeParams:
        return RuntimeParams(p_success=self.p_success, seed=self.seed, trials=self.trials)

    def synthesis_params(self) -> SynthesisParams:
        return SynthesisParams(
            rho=self.rho,
            length_stddev=self.length_stddev,
            seed=self.seed,
            rounding=self.length_rounding,
        )

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    def replace(self, **changes: Any) -> "RunConfig":
        """Copy with changes, re-validated."""
        payload = self.to_dict()
        payload.update(changes)
        return validate_run_config(payload)


_FIELD_TYPES = {item.name: item.type for item in fields(RunConfig)}


def normalize_key(key: str) -> str:
    """Map CLI / config-file spellings (`p-success`, `D`) to field names."""
    raw = key.strip()
    if raw == "D":
        return "distill_patches"
    if raw in ("J", "g", "t", "d", "m"):
        return raw
    normalized = raw.replace("-", "_").lower()
    if normalized == "distill_patches":
        return normalized
    if normalized not in _FIELD_TYPES:
        raise ConfigValidationError(f"Unknown configuration key {key!r}.")
    return normalized


def _coerce(key: str, value: Any) -> Any:
    kind = str(_FIELD_TYPES[key])
    if value is None or (isinstance(value, str) and value.strip().lower() in ("", "none", "null")):
        if "None" in kind:
            return None
        raise ConfigValidationError(f"Configuration key {key!r} needs a value.")
    try:
        if kind.startswith("int"):
            if isinstance(value, float) and not value.is_integer():
                raise ValueError(value)
            return int(float(value)) if isinstance(value, str) and "e" in value.lower() else int(value)
        if kind.startswith("float"):
            return float(value)
        if kind.startswith("bool"):
            return _as_bool(value)
    except (TypeError, ValueError) as exc:
        raise ConfigValidationError(f"Configuration key {key!r} has invalid value {value!r}.") from exc
    return str(value).strip()


def load_defaults(path: Path | None = None) -> dict[str, Any]:
    """Load the packaged (or overridden) defaults YAML."""
    try:
        import yaml
    except ModuleNotFoundError as exc:
        raise RuntimeError("PyYAML is required. Install dependencies with: pip install -e .") from exc

    target = path or DEFAULTS_PATH
    if not target.exists():
        raise FileNotFoundError(f"Defaults file not found: {target}")
    raw = yaml.safe_load(target.read_text(encoding="utf-8")) or {}
    if not isinstance(raw, dict):
        raise ConfigValidationError(f"Defaults file must hold a mapping: {target}")
    return {normalize_key(str(key)): value for key, value in raw.items()}


def parse_config_file(text: str) -> dict[str, str]:
    """Parse flat `key = value` lines; `#` starts a comment."""
    values: dict[str, str] = {}
    for line_number, raw_line in enumerate(text.splitlines(), start=1):
        content = raw_line.split("#", 1)[0].strip()
        if not content:
            continue
        if "=" not in content:
            raise ConfigValidationError(f"line {line_number}: expected 'key = value'")
        key, value = (part.strip() for part in content.split("=", 1))
        if not key:
            raise ConfigValidationError(f"line {line_number}: missing key")
        try:
            values[normalize_key(key)] = value
        except ConfigValidationError as exc:
            raise ConfigValidationError(f"line {line_number}: {exc}") from exc
    return values


def validate_run_config(payload: Mapping[str, Any]) -> RunConfig:
    """Coerce, schema-check and cross-check a flat parameter mapping."""
    merged = RunConfig().to_dict()
    for key, value in payload.items():
        name = normalize_key(key)
        merged[name] = _coerce(name, value)
    try:
        validate_run_config_payload(merged)
    except ContractValidationError as exc:
        raise ConfigValidationError(str(exc)) from exc

    config = RunConfig(**merged)
    try:
        a, b = config.grid()
    except LayoutError as exc:
        raise ConfigValidationError(str(exc)) from exc
    if a * b < config.qubit_count:
        raise ConfigValidationError(
            f"Data grid {a}x{b} holds {a * b} qubits; benchmark needs {config.qubit_count}."
        )
    return config


def build_run_config(
    *,
    settings: Settings | None = None,
    config_path: Path | None = None,
    cli_values: Mapping[str, Any] | None = None,
) -> RunConfig:
    """Layer defaults < environment < config file < CLI flags."""
    settings = settings or Settings.from_env()
    layered: dict[str, Any] = load_defaults(settings.defaults_path)
    layered.update(settings.overrides)
    if config_path is not None:
        if not config_path.exists():
            raise ConfigValidationError(f"Config file not found: {config_path}")
        layered.update(parse_config_file(config_path.read_text(encoding="utf-8")))
    for key, value in (cli_values or {}).items():
        if value is not None:
            layered[normalize_key(key)] = value
    return validate_run_config(layered)
