"""JSON Schema checks on run configs and schedules, plus stage failures.

Two schemas live under schemas/:
  - run_config.schema.json: parameter ranges of an assembled run configuration
  - schedule.schema.json: the shape of a schedule JSON dump (checked on load)

Every pipeline stage runs through `run_stage`, which turns any exception into a
StageFailure carrying the stage name; the CLI reports it as `Error [<stage>]: ...`
and run manifests record it through PipelineErrorContract.
"""

from __future__ import annotations

from dataclasses import dataclass
import json
from pathlib import Path
from typing import Any, Callable, TypeVar


RUN_CONFIG_SCHEMA = "run_config.schema.json"
SCHEDULE_SCHEMA = "schedule.schema.json"

T = TypeVar("T")


class ContractValidationError(ValueError):
    """Raised when a payload violates its JSON Schema contract."""


@dataclass(frozen=True)
class PipelineErrorContract:
    stage: str
    message: str
    error_type: str

    def to_dict(self) -> dict[str, Any]:
        """To dict."""
        return {
            "stage": self.stage,
            "message": self.message,
            "error_type": self.error_type,
        }


@dataclass
class StageFailure(Exception):
    stage: str
    message: str
    error_type: str = "Exception"

    def __str__(self) -> str:
        """Render as `stage: message`."""
        return f"{self.stage}: {self.message}"

    def to_contract(self) -> PipelineErrorContract:
        return PipelineErrorContract(stage=self.stage, message=self.message, error_type=self.error_type)


def run_stage(stage: str, action: Callable[..., T], *args: Any, **kwargs: Any) -> T:
    """Run one pipeline stage, labelling any failure with the stage name."""
    try:
        return action(*args, **kwargs)
    except StageFailure:
        raise
    except Exception as exc:
        raise StageFailure(stage=stage, message=str(exc), error_type=type(exc).__name__) from exc


def resolve_schema_path(name: str, schema_path: Path | None = None) -> Path:
    """Resolve schema path."""
    if schema_path is not None:
        if not schema_path.exists():
            raise FileNotFoundError(f"Schema file not found: {schema_path}")
        return schema_path

    candidates = [
        Path(__file__).resolve().parents[1] / "schemas" / name,
        Path.cwd() / "schemas" / name,
    ]
    for candidate in candidates:
        if candidate.exists():
            return candidate

    raise FileNotFoundError(
        "Could not locate schema file. Expected one of: "
        + ", ".join(str(path) for path in candidates)
    )


def load_schema(name: str, schema_path: Path | None = None) -> dict[str, Any]:
    """Load a schema as a JSON object."""
    path = resolve_schema_path(name, schema_path)
    parsed = json.loads(path.read_text(encoding="utf-8"))
    if not isinstance(parsed, dict):
        raise ContractValidationError(f"Schema {name} must be a top-level JSON object.")
    return parsed


def validate_against_schema(payload: Any, schema: dict[str, Any], label: str) -> None:
    """Raise ContractValidationError listing the first schema violations."""
    try:
        from jsonschema import Draft202012Validator
    except ModuleNotFoundError as exc:
        raise ContractValidationError(
            "jsonschema is required for contract validation. Install with: pip install -e ."
        ) from exc

    validator = Draft202012Validator(schema)
    errors = sorted(validator.iter_errors(payload), key=lambda err: list(err.path))
    if not errors:
        return

    details = []
    for err in errors[:5]:
        location = ".".join(str(item) for item in err.path) or "<root>"
        details.append(f"{location}: {err.message}")
    raise ContractValidationError(f"{label} failed schema validation: " + " | ".join(details))


def validate_run_config_payload(payload: dict[str, Any], schema_path: Path | None = None) -> dict[str, Any]:
    """Validate an assembled run configuration."""
    if not isinstance(payload, dict):
        raise ContractValidationError("Run configuration must be an object.")
    validate_against_schema(payload, load_schema(RUN_CONFIG_SCHEMA, schema_path), "Run configuration")
    return payload


def validate_schedule_payload(payload: dict[str, Any], schema_path: Path | None = None) -> dict[str, Any]:
    """Validate a schedule JSON dump before it is rebuilt."""
    if not isinstance(payload, dict):
        raise ContractValidationError("Schedule payload must be a JSON object.")
    validate_against_schema(payload, load_schema(SCHEDULE_SCHEMA, schema_path), "Schedule")
    instructions = payload["instructions"]
    ids = [item["id"] for item in instructions]
    if ids != list(range(len(ids))):
        raise ContractValidationError("Schedule instruction ids must be 0..n-1 in order.")
    rows = payload["layout"]["rows"]
    if len(payload["layout"]["grid"]) != rows:
        raise ContractValidationError("Schedule layout grid does not match its row count.")
    return payload


def parse_schedule_json(raw: str, schema_path: Path | None = None) -> dict[str, Any]:
    """Parse and validate schedule JSON text."""
    try:
        payload = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ContractValidationError(f"Schedule file is not valid JSON: {exc}") from exc
    return validate_schedule_payload(payload, schema_path=schema_path)
