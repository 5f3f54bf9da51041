"""Benchmark cases and their configuration."""

from dualweno.cases.config import (
    CaseConfig,
    DisturbanceSpec,
    OutputPlan,
    case_defaults,
    config_from_dict,
    emit_config,
    parse_config,
)
from dualweno.cases.convergence import ConvergenceReport, l1_error, observed_order, sweep

__all__ = [
    "CaseConfig",
    "ConvergenceReport",
    "DisturbanceSpec",
    "OutputPlan",
    "case_defaults",
    "config_from_dict",
    "emit_config",
    "l1_error",
    "observed_order",
    "parse_config",
    "sweep",
]
