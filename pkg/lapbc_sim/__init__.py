"""LAPBC simulator: SPC/LAPBC compilation, patch scheduling and distillation-delay runtime."""

from .circuit import Circuit, CircuitError, Gate, parse_ir, serialize
from .config import ConfigValidationError, RunConfig, Settings, build_run_config
from .contracts import ContractValidationError, PipelineErrorContract, StageFailure
from .isa import IsaInstruction, IsaProgram, parse_isa
from .layout import Layout, Mapping, gen_sparse, gen_standard
from .pauli import SignedPauli
from .runtime import RuntimeParams, RuntimeResult, run_trials, simulate, summarize
from .scheduler import Schedule, ScheduleParams, schedule, validate_schedule
from .transpiler import lapbc_transpile, spc_cost, spc_transpile


def run_compare(*args, **kwargs):
    """Run compare."""
    from .experiments import run_compare as _run_compare

    return _run_compare(*args, **kwargs)


def sweep_p_success(*args, **kwargs):
    """Sweep p_success."""
    from .experiments import sweep_p_success as _sweep_p_success

    return _sweep_p_success(*args, **kwargs)


__all__ = [
    "Circuit",
    "CircuitError",
    "ConfigValidationError",
    "ContractValidationError",
    "Gate",
    "IsaInstruction",
    "IsaProgram",
    "Layout",
    "Mapping",
    "PipelineErrorContract",
    "RunConfig",
    "RuntimeParams",
    "RuntimeResult",
    "Schedule",
    "ScheduleParams",
    "Settings",
    "SignedPauli",
    "StageFailure",
    "build_run_config",
    "gen_sparse",
    "gen_standard",
    "lapbc_transpile",
    "parse_ir",
    "parse_isa",
    "run_compare",
    "run_trials",
    "schedule",
    "serialize",
    "simulate",
    "spc_cost",
    "spc_transpile",
    "summarize",
    "sweep_p_success",
    "validate_schedule",
]
