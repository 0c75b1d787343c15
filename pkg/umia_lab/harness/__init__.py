"""Experiment orchestration: configs, runs, the membership game, suites and the CLI."""

from .collector import StageTracker
from .config_loader import ExperimentConfig, build_section, config_from_mapping, load_config, load_suite
from .experiment import ExperimentOutcome, SeedContext, evaluate_seed, prepare_seed, resolve_output_root, run_experiment
from .game import constant_adversary, oracle_adversary, play_game, simulate_game
from .report_io import aggregate_reports, render_aggregate
from .suite import COMPARISON_COLUMNS, run_suite
from .ulira_run import UliraOutcome, run_ulira

__all__ = [
    "COMPARISON_COLUMNS",
    "ExperimentConfig",
    "ExperimentOutcome",
    "SeedContext",
    "StageTracker",
    "UliraOutcome",
    "aggregate_reports",
    "build_section",
    "config_from_mapping",
    "constant_adversary",
    "evaluate_seed",
    "load_config",
    "load_suite",
    "oracle_adversary",
    "play_game",
    "prepare_seed",
    "render_aggregate",
    "resolve_output_root",
    "run_experiment",
    "run_suite",
    "run_ulira",
    "simulate_game",
]
