"""Configs, grid presets, the experiment runner, self-checks, and the CLI."""
from .check import CheckResult, gradient_suite, oracle_suite, run_checks
from .config import ExperimentConfig, parse_config, resolve_config
from .grid import PRESETS, GridSpec, expand_grid, preset_rows
from .runner import RESULT_COLUMNS, markdown_table, run_and_emit, run_one

__all__ = [
    "CheckResult", "ExperimentConfig", "GridSpec", "PRESETS", "RESULT_COLUMNS", "expand_grid",
    "gradient_suite", "markdown_table", "oracle_suite", "parse_config", "preset_rows", "resolve_config",
    "run_and_emit", "run_checks", "run_one",
]
